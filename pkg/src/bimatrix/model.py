"""Hermitian two-matrix model: potentials, validation and reference models.

The measure on pairs of Hermitian ``N x N`` matrices is proportional to

    exp(-(N/T) tr[V1(M1) + V2(M2) - M1 M2]) dM1 dM2

with polynomial potentials written as ``V(x) = sum_k g_k x**k / k`` so that
``V'(x) = sum_k g_k x**(k-1)``.  The constant term is fixed to zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConfigInvalid, NonHermitianModel

__all__ = [
    "Potential",
    "ModelSpec",
    "ValidatedModel",
    "validate_model",
    "gaussian_model",
    "quartic_model",
    "model_from_dict",
    "load_model",
]

# weight(R) / weight(argmin) must fall below this
WEIGHT_CUTOFF = 1e-30


@dataclass(frozen=True)
class Potential:
    """Polynomial potential in the convention ``V(x) = sum g_k x^k / k``.

    Parameters
    ----------
    coeffs : sequence of float
        ``(g_1, ..., g_{d+1})``.  Trailing zeros are stripped so that the
        last entry is the leading coefficient.
    """

    coeffs: tuple

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        while c and c[-1] == 0.0:
            c.pop()
        if not c:
            raise ConfigInvalid("potential has no nonzero coefficient")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        """Degree of V (that is ``d + 1``)."""
        return len(self.coeffs)

    @property
    def d(self) -> int:
        """Degree of V'."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    def g(self, k: int) -> float:
        """Coefficient ``g_k`` (zero outside ``1..d+1``)."""
        if 1 <= k <= len(self.coeffs):
            return self.coeffs[k - 1]
        return 0.0

    def monomial(self) -> np.ndarray:
        """Monomial coefficients ``c_0..c_{d+1}`` of V (ascending)."""
        c = np.zeros(self.degree + 1)
        for k, gk in enumerate(self.coeffs, start=1):
            c[k] = gk / k
        return c

    def deriv_monomial(self) -> np.ndarray:
        """Monomial coefficients ``c_0..c_d`` of V' (ascending)."""
        return np.array(self.coeffs, dtype=float)

    def __call__(self, x):
        """Evaluate V by Horner; works for floats, arrays and mpmath numbers."""
        acc = 0
        for k in range(self.degree, 0, -1):
            acc = (acc + self.coeffs[k - 1] / k) * x
        return acc

    def deriv(self, x):
        acc = 0
        for k in range(self.degree, 0, -1):
            acc = acc * x + self.coeffs[k - 1]
        return acc

    def deriv2(self, x):
        acc = 0
        for k in range(self.degree, 1, -1):
            acc = acc * x + (k - 1) * self.coeffs[k - 1]
        return acc

    def deriv_of_matrix(self, Q: np.ndarray) -> np.ndarray:
        """``V'(Q)`` by Horner on a square matrix."""
        n = Q.shape[0]
        eye = np.eye(n, dtype=Q.dtype)
        acc = np.zeros_like(Q)
        for k in range(self.degree, 0, -1):
            acc = acc @ Q + self.coeffs[k - 1] * eye
        return acc

    def is_even(self) -> bool:
        return all(c == 0.0 for c in self.coeffs[0::2])

    def scaled(self, s: float) -> "Potential":
        return Potential(tuple(s * c for c in self.coeffs))


@dataclass(frozen=True)
class ModelSpec:
    """Two potentials, temperature ``T`` and matrix size ``N``."""

    v1: Potential
    v2: Potential
    T: float = 1.0
    N: int = 1

    def __post_init__(self):
        if not isinstance(self.v1, Potential):
            object.__setattr__(self, "v1", Potential(tuple(self.v1)))
        if not isinstance(self.v2, Potential):
            object.__setattr__(self, "v2", Potential(tuple(self.v2)))
        object.__setattr__(self, "T", float(self.T))
        if int(self.N) != self.N:
            raise ConfigInvalid("N must be an integer")
        object.__setattr__(self, "N", int(self.N))

    @property
    def coupling(self) -> float:
        """The ratio ``N / T`` multiplying the action."""
        return self.N / self.T

    def action(self, x, y):
        return self.v1(x) + self.v2(y) - x * y

    def to_dict(self) -> dict:
        return {"v1": list(self.v1.coeffs), "v2": list(self.v2.coeffs),
                "T": self.T, "N": self.N}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class ValidatedModel:
    """A model accepted by :func:`validate_model`.

    Attributes
    ----------
    spec : ModelSpec
    d1, d2 : int
        Degrees of V1' and V2'.
    R : float
        Integration bound, the larger of ``R_x`` and ``R_y``.
    R_x, R_y : float
        Bounds for the x and y marginal envelopes.
    center : tuple of float
        Location of the minimum of ``V1(x) + V2(y) - x y``.
    """

    spec: ModelSpec
    d1: int
    d2: int
    R: float
    R_x: float
    R_y: float
    center: tuple = field(default=(0.0, 0.0))

    # convenience pass-throughs
    @property
    def v1(self) -> Potential:
        return self.spec.v1

    @property
    def v2(self) -> Potential:
        return self.spec.v2

    @property
    def T(self) -> float:
        return self.spec.T

    @property
    def N(self) -> int:
        return self.spec.N

    @property
    def coupling(self) -> float:
        return self.spec.coupling

    def with_N(self, N: int) -> "ValidatedModel":
        return validate_model(replace(self.spec, N=int(N)))

    def swapped(self) -> "ValidatedModel":
        """The mirror model with the roles of the two matrices exchanged."""
        return validate_model(ModelSpec(self.v2, self.v1, self.T, self.N))

    def is_symmetric(self) -> bool:
        return self.v1 == self.v2


def _profile_min(v: Potential, s):
    """``min_y [V(y) - s y]`` for each ``s`` (exact via critical points)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    dcoef = v.deriv_monomial()
    out = np.empty_like(s)
    for i, si in enumerate(s):
        c = dcoef.copy()
        c[0] -= si
        roots = np.roots(c[::-1]) if len(c) > 1 else np.array([])
        real = roots[np.abs(roots.imag) < 1e-9 * (1 + np.abs(roots.real))].real
        if real.size == 0:
            out[i] = -np.inf
        else:
            out[i] = np.min(v(real) - si * real)
    return out


def _envelope(va: Potential, vb: Potential, x):
    """Effective potential of one variable after optimizing over the other."""
    return va(np.asarray(x, dtype=float)) + _profile_min(vb, x)


def _bound(va: Potential, vb: Potential, coupling: float, floor: float) -> float:
    target = math.log(1.0 / WEIGHT_CUTOFF)
    R = 1.0
    for _ in range(400):
        vals = coupling * (_envelope(va, vb, [-R, R]) - floor)
        if np.all(vals > target):
            return R
        R *= 1.05
    raise NonHermitianModel("no finite integration bound: weight does not decay")


def _check_hermitian(v: Potential, label: str):
    if v.degree < 2 or v.degree % 2 != 0:
        raise NonHermitianModel(
            f"{label}: deg V = {v.degree} must be even and at least 2 "
            "(equivalently deg V' odd)")
    if v.leading <= 0:
        raise NonHermitianModel(f"{label}: leading coefficient must be positive")


def validate_model(spec) -> ValidatedModel:
    """Check admissibility on the real contour and attach integration data.

    Parameters
    ----------
    spec : ModelSpec or ValidatedModel
        A validated model is returned unchanged.

    Returns
    -------
    ValidatedModel

    Raises
    ------
    NonHermitianModel
        If a potential has odd degree or negative leading coefficient, if
        the quadratic form is not positive definite in the linear case, or
        if the action is not bounded below on a sampled grid.
    """
    if isinstance(spec, ValidatedModel):
        return spec
    if not isinstance(spec, ModelSpec):
        raise ConfigInvalid("expected a ModelSpec")
    if spec.T <= 0 or not math.isfinite(spec.T):
        raise ConfigInvalid("temperature must be positive")
    if spec.N < 1:
        raise ConfigInvalid("N must be a positive integer")
    v1, v2 = spec.v1, spec.v2
    _check_hermitian(v1, "V1")
    _check_hermitian(v2, "V2")
    d1, d2 = v1.d, v2.d
    if d1 == 1 and d2 == 1:
        g2, gt2 = v1.g(2), v2.g(2)
        if not (g2 > 0 and g2 * gt2 > 1.0):
            raise NonHermitianModel(
                "quadratic form [[g2,-1],[-1,g~2]] is not positive definite")

    # bounded below: the minimum over a coarse grid lies strictly inside
    for L in (4.0, 8.0):
        t = np.linspace(-L, L, 81)
        X, Y = np.meshgrid(t, t, indexing="ij")
        F = spec.action(X, Y)
        i, j = np.unravel_index(np.argmin(F), F.shape)
        if not np.isfinite(F[i, j]) or i in (0, 80) or j in (0, 80):
            raise NonHermitianModel("V1(x)+V2(y)-xy is not bounded below")

    # envelope minimum, refined on a fine grid of the marginal
    t = np.linspace(-8, 8, 3201)
    ex = _envelope(v1, v2, t)
    floor = float(np.min(ex))
    xc = float(t[np.argmin(ex)])
    ey = _envelope(v2, v1, t)
    yc = float(t[np.argmin(ey)])
    floor = min(floor, float(np.min(ey)))
    R_x = _bound(v1, v2, spec.coupling, floor)
    R_y = _bound(v2, v1, spec.coupling, floor)
    return ValidatedModel(spec=spec, d1=d1, d2=d2, R=max(R_x, R_y),
                          R_x=R_x, R_y=R_y, center=(xc, yc))


def gaussian_model(N: int = 1, g2: float = 2.0, gt2: float = 2.0,
                   T: float = 1.0) -> ValidatedModel:
    """Reference Gaussian model; the defaults give G0 (V1 = x^2, V2 = y^2)."""
    return validate_model(ModelSpec(Potential((0.0, g2)), Potential((0.0, gt2)), T, N))


def quartic_model(t: float, N: int = 1, T: float = 1.0) -> ValidatedModel:
    """``V1 = x^2 + t x^4/4``, ``V2 = y^2``; reduces to G0 at ``t = 0``."""
    v1 = Potential((0.0, 2.0, 0.0, t)) if t != 0 else Potential((0.0, 2.0))
    return validate_model(ModelSpec(v1, Potential((0.0, 2.0)), T, N))


def model_from_dict(d: dict) -> ValidatedModel:
    """Build and validate a model from its JSON description."""
    try:
        spec = ModelSpec(Potential(tuple(d["v1"])), Potential(tuple(d["v2"])),
                         float(d.get("T", 1.0)), int(d.get("N", 1)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad model description: {exc}") from exc
    return validate_model(spec)


def load_model(path) -> ValidatedModel:
    with open(path) as fh:
        return model_from_dict(json.load(fh))
