"""Large-N solution of the loop equations on a genus-zero spectral curve.

In the one-cut regime the curve ``E(x, y) = 0`` is rational:

    x(z) = gamma z + sum_{k=0}^{d2} a_k z^{-k},
    y(z) = gamma~ / z + sum_{k=0}^{d1} b_k z^k,

with ``z = infinity`` the point where ``x`` is large on the physical sheet and
``z = 0`` the corresponding point for ``y``.  The coefficients follow from

    y(z) - V1'(x(z)) = -T / (gamma z) + O(z^-2)      (z -> infinity),
    x(z) - V2'(y(z)) = -T z / gamma~ + O(z^2)        (z -> 0).

The rescaling ``z -> lambda z`` leaves both conditions invariant; the gauge
is fixed by ``gamma = gamma~``.  Observables are residues of Laurent
polynomials in ``z``, read off as coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import root

from .diffsys import SpectralCurvePoly, chebyshev_nodes
from .errors import (CoincidentPoints, DegenerateBranchPoint, InterpolationInconsistent,
                     NewtonDiverged, OutsideCut)
from .laurent import Laurent
from .model import Potential, validate_model

__all__ = [
    "RationalSpectralCurve",
    "solve_genus0_curve",
    "residue_conditions",
    "leading_moments",
    "free_energy_derivatives",
    "free_energy",
    "bergmann_two_point",
    "connected_moment",
    "CurveModuli",
    "curve_moduli",
    "SubleadingResolvent",
    "resolvent_subleading",
    "equilibrium_density",
    "physical_Y",
    "physical_X",
    "compose_check",
    "spectral_curve_E0",
    "mixed_resolvent_large_n",
]

SOLVE_TOL = 1e-12


# ---------------------------------------------------------------------------
# Curve data
# ---------------------------------------------------------------------------

def _x_series(gamma, a) -> Laurent:
    terms = {1: gamma}
    for k, v in enumerate(a):
        terms[-k] = terms.get(-k, 0.0) + v
    return Laurent.from_dict(terms)


def _y_series(gamma_t, b) -> Laurent:
    terms = {-1: gamma_t}
    for k, v in enumerate(b):
        terms[k] = terms.get(k, 0.0) + v
    return Laurent.from_dict(terms)


@dataclass(frozen=True, eq=False)
class RationalSpectralCurve:
    """Genus-zero parameterization of the leading-order spectral curve.

    Attributes
    ----------
    model : ValidatedModel
    gamma, gamma_t : float
        Residues of ``x`` at ``z = infinity`` and of ``y`` at ``z = 0``.
    a : ndarray
        ``a_0..a_{d2}`` (coefficients of ``z^0..z^-d2`` in ``x``).
    b : ndarray
        ``b_0..b_{d1}`` (coefficients of ``z^0..z^d1`` in ``y``).
    residual : float
        Largest residual of the defining conditions.
    steps : int
        Continuation steps used by the solver.
    """

    model: object
    gamma: float
    gamma_t: float
    a: np.ndarray
    b: np.ndarray
    residual: float
    steps: int = 1
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def T(self) -> float:
        return self.model.T

    @property
    def xs(self) -> Laurent:
        if "x" not in self._cache:
            self._cache["x"] = _x_series(self.gamma, self.a)
        return self._cache["x"]

    @property
    def ys(self) -> Laurent:
        if "y" not in self._cache:
            self._cache["y"] = _y_series(self.gamma_t, self.b)
        return self._cache["y"]

    def x(self, z):
        return self.xs(z)

    def y(self, z):
        return self.ys(z)

    def dx(self, z):
        return self.xs.deriv()(z)

    def dy(self, z):
        return self.ys.deriv()(z)

    def derivatives(self, z, order: int = 4, which: str = "x") -> list:
        """``[f(z), f'(z), ..., f^(order)(z)]`` for ``f = x`` or ``y``."""
        s = self.xs if which == "x" else self.ys
        out = []
        for _ in range(order + 1):
            out.append(s(z))
            s = s.deriv()
        return out

    def branch_points(self) -> np.ndarray:
        """Zeros of ``x'(z)``: roots of ``gamma z^{d2+1} - sum k a_k z^{d2-k}``."""
        d2 = len(self.a) - 1
        c = np.zeros(d2 + 2)
        c[0] = self.gamma
        for k in range(1, d2 + 1):
            c[k + 1] = -k * self.a[k]
        r = np.roots(c)
        return r[np.argsort(np.angle(r))]

    def y_branch_points(self) -> np.ndarray:
        """Zeros of ``y'(z)``: roots of ``-gamma~ + sum k b_k z^{k+1}``."""
        d1 = len(self.b) - 1
        c = np.zeros(d1 + 2)
        c[-1] = -self.gamma_t
        for k in range(1, d1 + 1):
            c[d1 + 1 - (k + 1)] += k * self.b[k]
        return np.roots(c)

    def x_preimages(self, x) -> np.ndarray:
        """The ``d2+1`` solutions of ``x(z) = x``, sorted by decreasing modulus."""
        d2 = len(self.a) - 1
        c = np.zeros(d2 + 2, dtype=complex)
        c[0] = self.gamma
        c[1] = self.a[0] - x
        for k in range(1, d2 + 1):
            c[k + 1] = self.a[k]
        r = np.roots(c)
        return r[np.argsort(-np.abs(r))]

    def y_preimages(self, y) -> np.ndarray:
        """The ``d1+1`` solutions of ``y(z) = y``, sorted by increasing modulus."""
        d1 = len(self.b) - 1
        # z y(z) - y z = gamma~ + (b_0 - y) z + sum_{k>=1} b_k z^{k+1}
        c = np.zeros(d1 + 2, dtype=complex)
        c[-1] = self.gamma_t
        c[-2] = self.b[0] - y
        for k in range(1, d1 + 1):
            c[d1 - k] = self.b[k]
        r = np.roots(c)
        return r[np.argsort(np.abs(r))]

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "gamma_t": self.gamma_t, "a": list(map(float, self.a)),
                "b": list(map(float, self.b)),
                "branch_points": [[float(z.real), float(z.imag)] for z in self.branch_points()],
                "residual": self.residual}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# ---------------------------------------------------------------------------
# Solver
# ---------------------------------------------------------------------------

def _conditions(s, a, b, v1: Potential, v2: Potential, T: float) -> np.ndarray:
    """All ``d1 + d2 + 4`` coefficient conditions, gauge ``gamma = gamma~ = s``."""
    x = _x_series(s, a)
    y = _y_series(s, b)
    d1, d2 = len(b) - 1, len(a) - 1
    r1 = y - x.compose_poly(v1.deriv_monomial())
    r2 = x - y.compose_poly(v2.deriv_monomial())
    eqs = [r1.coef(j) for j in range(d1, -1, -1)]
    eqs.append(r1.coef(-1) + T / s)
    eqs += [r2.coef(-j) for j in range(d2, -1, -1)]
    eqs.append(r2.coef(1) + T / s)
    return np.array(eqs, dtype=float)


def _gaussian_start(v1: Potential, v2: Potential, T: float, d1: int, d2: int):
    g1, g2 = v1.g(1), v1.g(2)
    h1, h2 = v2.g(1), v2.g(2)
    if g2 * h2 <= 1.0:
        raise NewtonDiverged("no Gaussian starting point: g2 g~2 <= 1")
    s = math.sqrt(T / (g2 * h2 - 1.0))
    a0 = (h1 + h2 * g1) / (1.0 - g2 * h2)
    b0 = g1 + g2 * a0
    a = np.zeros(d2 + 1)
    b = np.zeros(d1 + 1)
    a[0], a[1] = a0, h2 * s
    b[0], b[1] = b0, g2 * s
    return s, a, b


def _interp_potential(v: Potential, tau: float) -> Potential:
    c = list(v.coeffs)
    for k in range(2, len(c)):
        c[k] *= tau
    return Potential(tuple(c))


def solve_genus0_curve(model, tol: float = SOLVE_TOL, max_steps: int = 64
                       ) -> RationalSpectralCurve:
    """Solve the genus-zero curve by continuation from the quadratic model.

    The higher couplings are switched on along ``tau in [0, 1]``; each step
    solves the square system obtained by dropping one of the two
    equivalent residue conditions, and the final residual is measured on
    all conditions.

    Raises
    ------
    NewtonDiverged
        If a continuation step cannot be completed, or the solution has
        ``gamma <= 0`` (no one-cut solution connected to the Gaussian).
    """
    model = validate_model(model)
    v1, v2, T = model.v1, model.v2, model.T
    d1, d2 = model.d1, model.d2
    s, a, b = _gaussian_start(v1, v2, T, d1, d2)
    u = np.concatenate([[s], a, b])

    def unpack(u):
        return u[0], u[1:d2 + 2], u[d2 + 2:]

    def solve_at(tau, u0):
        w1, w2 = _interp_potential(v1, tau), _interp_potential(v2, tau)
        fun = lambda u: _conditions(*unpack(u), w1, w2, T)[:-1]
        sol = root(fun, u0, method="hybr", tol=1e-15)
        full = _conditions(*unpack(sol.x), w1, w2, T)
        ok = np.all(np.isfinite(full)) and sol.x[0] > 0
        return sol.x, (float(np.max(np.abs(full))) if ok else np.inf)

    tau, step, steps = 0.0, 1.0, 0
    nonlinear = v1.degree > 2 or v2.degree > 2
    if nonlinear:
        while tau < 1.0:
            if steps >= max_steps:
                raise NewtonDiverged("continuation did not reach the target couplings")
            t_new = min(1.0, tau + step)
            u_new, res = solve_at(t_new, u)
            steps += 1
            if res < 1e-9 and abs(u_new[0] - u[0]) < 0.5 * u[0]:
                u, tau = u_new, t_new
                step = min(1.0, 2 * step)
            else:
                step /= 2
                if step < 1e-6:
                    raise NewtonDiverged(f"continuation stalled at tau={tau:.6f}")
    # polish at the target
    u, res = solve_at(1.0, u)
    if not res < tol:
        raise NewtonDiverged(f"curve residual {res:.2e} above {tol:.0e}")
    s, a, b = unpack(u)
    return RationalSpectralCurve(model=model, gamma=float(s), gamma_t=float(s),
                                 a=np.array(a), b=np.array(b), residual=res, steps=steps)


def residue_conditions(curve: RationalSpectralCurve) -> dict:
    """Residuals of the defining residue and moment conditions.

    ``Res_{inf_x} y dx = T``, ``Res_{inf_y} x dy = T``,
    ``Res_{inf_x} x^-k y dx = -g_k`` and ``Res_{inf_y} y^-k x dy = -g~_k``.
    """
    m = curve.model
    x, y = curve.xs, curve.ys
    dx, dy = x.deriv(), y.deriv()
    out = {"T_x": float(abs((y * dx).residue_at_infinity() - m.T)),
           "T_y": float(abs((x * dy).residue_at_zero() - m.T))}
    dev = 0.0
    for k in range(1, m.d1 + 2):
        inv = x.inverse_at_infinity(-4 * (m.d1 + m.d2) - 4 * k) if k else None
        r = (inv ** k * y * dx).residue_at_infinity()
        dev = max(dev, abs(r + m.v1.g(k)))
    out["moments_x"] = float(dev)
    # mirror: w = 1/z exchanges the roles of the two infinities
    xm = Laurent(y.c[::-1], -y.high)
    ym = Laurent(x.c[::-1], -x.high)
    dev = 0.0
    for k in range(1, m.d2 + 2):
        inv = xm.inverse_at_infinity(-4 * (m.d1 + m.d2) - 4 * k)
        r = (inv ** k * ym * xm.deriv()).residue_at_infinity()
        dev = max(dev, abs(r + m.v2.g(k)))
    out["moments_y"] = float(dev)
    out["max"] = max(out.values())
    return out


# ---------------------------------------------------------------------------
# Moments and free energy
# ---------------------------------------------------------------------------

def leading_moments(curve: RationalSpectralCurve, kmax: int) -> np.ndarray:
    """``T_k = lim (1/N) <tr M1^k> = (1/T) Res_{inf_x} x^k y dx`` for ``k <= kmax``."""
    x, y = curve.xs, curve.ys
    base = y * x.deriv()
    out = np.empty(kmax + 1)
    xk = Laurent([1.0], 0)
    for k in range(kmax + 1):
        out[k] = float((xk * base).residue_at_infinity()) / curve.T
        xk = xk * x
    return out


def _primitive_parts(curve):
    """Laurent-polynomial parts of the regularized integrals from the two infinities."""
    m = curve.model
    x, y = curve.xs, curve.ys
    f1 = (y - x.compose_poly(m.v1.deriv_monomial())) * x.deriv()
    f2 = (x - y.compose_poly(m.v2.deriv_monomial())) * y.deriv()
    # f1 = -T/z + (powers <= -2); f2 = T/z + (powers >= 0)
    P1 = {k + 1: v / (k + 1) for k, v in f1.terms().items() if k < -1}
    P2 = {k + 1: v / (k + 1) for k, v in f2.terms().items() if k > -1}
    stray = [abs(v) for k, v in f1.terms().items() if k > -1]
    stray += [abs(v) for k, v in f2.terms().items() if k < -1]
    if max(stray + [0.0]) > 1e-8:
        raise NewtonDiverged("curve does not satisfy the asymptotic conditions")
    return Laurent.from_dict(P1 or {0: 0.0}), Laurent.from_dict(P2 or {0: 0.0}), f1, f2


def _mu_series(curve) -> Laurent:
    m = curve.model
    x, y = curve.xs, curve.ys
    P1, P2, _, _ = _primitive_parts(curve)
    return P1 + P2 + x.compose_poly(m.v1.monomial()) + y.compose_poly(m.v2.monomial()) - x * y


def free_energy_derivatives(curve: RationalSpectralCurve, probes=(1.7, 2.3 + 0.4j, -1.9 + 1.1j)
                            ) -> dict:
    """First derivatives of the leading free energy.

    ``dF/dg_k = (1/k) Res_{inf_x} x^k y dx`` and
    ``dF/dg~_k = (1/k) Res_{inf_y} y^k x dy``.  ``dF/dT`` is the regularized
    integral between the two infinities; its integrand has an exact
    Laurent primitive, so the expression is a Laurent polynomial in the
    probe point ``z`` plus ``-T ln(gamma gamma~)``.  It is evaluated at the
    probe points, and ``mu_nonconstant`` reports the largest coefficient of
    a nonzero power (zero when the probe independence holds).
    """
    m = curve.model
    x, y = curve.xs, curve.ys
    dx, dy = x.deriv(), y.deriv()
    dg = {k: float((x ** k * y * dx).residue_at_infinity()) / k for k in range(1, m.d1 + 2)}
    dgt = {k: float((y ** k * x * dy).residue_at_zero()) / k for k in range(1, m.d2 + 2)}
    C = _mu_series(curve)
    log_term = -m.T * math.log(curve.gamma * curve.gamma_t)
    nonconst = max([abs(v) for k, v in C.terms().items() if k != 0] + [0.0])
    probe_vals = [complex(C(np.complex128(p))) + log_term for p in probes]
    return {"dF_dg": dg, "dF_dgt": dgt, "dF_dT": float(C.coef(0)) + log_term,
            "dF_dT_probes": probe_vals, "mu_nonconstant": float(nonconst),
            "res_xy2dx": float((x * y * y * dx).residue_at_infinity())}


def free_energy(curve: RationalSpectralCurve) -> float:
    """Leading free energy assembled from the homogeneity relation.

    ``F = (1/2)[sum g_k dF/dg_k + sum g~_k dF/dg~_k + T dF/dT - (1/2) Res x y^2 dx]``
    with ``k`` running over the couplings actually present.
    """
    m = curve.model
    d = free_energy_derivatives(curve)
    s = sum(m.v1.g(k) * v for k, v in d["dF_dg"].items())
    s += sum(m.v2.g(k) * v for k, v in d["dF_dgt"].items())
    return 0.5 * (s + m.T * d["dF_dT"] - 0.5 * d["res_xy2dx"])


# ---------------------------------------------------------------------------
# Two-point functions
# ---------------------------------------------------------------------------

def _divided_difference(f: Laurent, z1, z2):
    """``(f(z1) - f(z2)) / (z1 - z2)`` without cancellation, for a Laurent polynomial."""
    out = 0.0
    for k, c in f.terms().items():
        if k > 0:
            out += c * sum(z1 ** j * z2 ** (k - 1 - j) for j in range(k))
        elif k < 0:
            m = -k
            out -= c * sum(z1 ** (-j) * z2 ** (-(m + 1 - j)) for j in range(1, m + 1))
    return out


def _schwarzian(f1, f2, f3):
    return f3 / f1 - 1.5 * (f2 / f1) ** 2


def bergmann_two_point(curve: RationalSpectralCurve, z1, z2, mixed: bool = True,
                       diag_tol: float = 1e-6) -> dict:
    """Leading connected two-point resolvents from the genus-zero Bergmann kernel.

    ``B = dz1 dz2 / (z1 - z2)^2``; ``W_{1;1} = [B - dx1 dx2/(x1-x2)^2]/(dx1 dx2)``,
    ``W_{2;2}`` likewise with ``y`` and ``W_{1;2} = -B/(dx1 dy2)``.  When
    ``|z1 - z2| < diag_tol`` the coincident-point limit
    ``W_{1;1} = -(1/6) {x, z} / x'^2`` is returned (same for ``W_{2;2}``).

    Raises
    ------
    CoincidentPoints
        For coincident points with ``mixed=True``: ``W_{1;2}`` has no
        subtraction and keeps its double pole.
    """
    z1, z2 = complex(z1), complex(z2)
    xd = curve.derivatives(z1, 3, "x")
    yd = curve.derivatives(z1, 3, "y")
    if abs(z1 - z2) < diag_tol:
        if mixed:
            raise CoincidentPoints("W_{1;2} is singular at coincident points")
        return {"W11": -_schwarzian(*xd[1:4]) / (6 * xd[1] ** 2),
                "W22": -_schwarzian(*yd[1:4]) / (6 * yd[1] ** 2),
                "W12": None, "diagonal": True}
    h = z1 - z2
    dx1, dx2 = xd[1], curve.dx(z2)
    dy1, dy2 = yd[1], curve.dy(z2)
    # B - dx1 dx2 / (x1-x2)^2 = [1 - dx1 dx2 / Dx^2] / h^2 with Dx the divided difference
    Dx = _divided_difference(curve.xs, z1, z2)
    Dy = _divided_difference(curve.ys, z1, z2)
    if abs(Dx) < 1e-300 or abs(Dy) < 1e-300:
        raise CoincidentPoints("distinct points with equal x or y")
    return {"W11": (1.0 - dx1 * dx2 / Dx ** 2) / (h * h * dx1 * dx2),
            "W22": (1.0 - dy1 * dy2 / Dy ** 2) / (h * h * dy1 * dy2),
            "W12": -1.0 / (h * h * dx1 * dy2), "diagonal": False}


def connected_moment(curve: RationalSpectralCurve, k: int, l: int, kind: str = "11") -> float:
    """Leading ``<tr M_i^k tr M_j^l>_c`` by a double residue of the Bergmann kernel.

    For ``kind="11"`` both points go to ``inf_x`` (``|z1| > |z2|``), and
    ``1/(z1-z2)^2 = sum_n (n+1) z2^n / z1^(n+2)`` turns the double contour
    into a finite sum over Laurent coefficients of ``x^k`` and ``x^l``.
    ``kind="22"`` uses ``y`` around ``inf_y`` and ``kind="12"`` mixes them.
    """
    x, y = curve.xs, curve.ys
    if kind == "11":
        f, g = x ** k, x ** l
        return float(sum((n + 1) * f.coef(n + 1) * g.coef(-n - 1) for n in range(0, f.high)))
    if kind == "22":
        # around z = 0 the roles of the exponents flip: |z1| < |z2|
        f, g = y ** k, y ** l
        return float(sum((n + 1) * f.coef(-n - 1) * g.coef(n + 1) for n in range(0, -f.low)))
    if kind == "12":
        # p near inf_x (large z1), q near inf_y (small z2); W12 dx dy = -B
        f, g = x ** k, y ** l
        return float(-sum((n + 1) * f.coef(n + 1) * g.coef(-n - 1) for n in range(0, f.high)))
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# Branch points and the 1/N^2 resolvent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveModuli:
    """Branch-point data of a genus-zero curve.

    Attributes
    ----------
    genus : int
    filling_fractions : tuple
        Empty at genus zero.
    branch_points : ndarray
        Zeros ``e_i`` of ``x'(z)``.
    images : ndarray
        ``a_i = x(e_i)``.
    dy : ndarray
        ``y'(e_i)``.
    schwarzian : ndarray
        ``{z, zeta_i}`` at ``e_i`` for the local parameter ``zeta_i = sqrt(x - a_i)``.
    """

    genus: int
    filling_fractions: tuple
    branch_points: np.ndarray
    images: np.ndarray
    dy: np.ndarray
    schwarzian: np.ndarray

    def to_dict(self) -> dict:
        c = lambda v: [[float(np.real(u)), float(np.imag(u))] for u in v]
        return {"genus": self.genus, "filling_fractions": list(self.filling_fractions),
                "branch_points": c(self.branch_points), "images": c(self.images),
                "dy": c(self.dy), "schwarzian": c(self.schwarzian)}


def curve_moduli(curve: RationalSpectralCurve, min_curvature: float = 1e-8) -> CurveModuli:
    """Branch points, their images and local data.

    Raises
    ------
    DegenerateBranchPoint
        If ``|x''(e_i)|`` is below ``min_curvature`` (a higher-order critical point).
    """
    e = curve.branch_points()
    S = []
    for ei in e:
        d = curve.derivatives(ei, 4, "x")
        c2, c3, c4 = d[2] / 2, d[3] / 6, d[4] / 24
        if abs(d[2]) < min_curvature:
            raise DegenerateBranchPoint(f"x''(e) = {abs(d[2]):.2e} at e = {ei}")
        S.append(-(3 * c4 / c2 - 2.25 * (c3 / c2) ** 2) / c2)
    return CurveModuli(genus=0, filling_fractions=(), branch_points=e, images=curve.x(e),
                       dy=curve.dy(e), schwarzian=np.array(S))


def _inner_residue(curve, zq):
    """``Res_{p'->q} B(q,p') / ((y(q)-y(p'))(x(q)-x(p')))`` per unit ``dz_q``.

    With ``w = z_{p'} - z_q`` the integrand is ``1 / (w^4 X(w) Y(w))`` where
    ``X(w) = sum_{j>=1} x^(j)(z_q) w^(j-1) / j!``; the residue is the ``w^3``
    coefficient of ``1 / (X Y)``.
    """
    xd = curve.derivatives(zq, 4, "x")
    yd = curve.derivatives(zq, 4, "y")
    fact = [1, 1, 2, 6, 24]
    X = [xd[j] / fact[j] for j in range(1, 5)]
    Y = [yd[j] / fact[j] for j in range(1, 5)]
    # product series, then reciprocal to order 3
    P = [sum(X[i] * Y[n - i] for i in range(n + 1)) for n in range(4)]
    G = [1 / P[0]]
    for n in range(1, 4):
        G.append(-sum(P[i] * G[n - i] for i in range(1, n + 1)) / P[0])
    return G[3]


@dataclass(frozen=True, eq=False)
class SubleadingResolvent:
    """``T W_1^(1)(x(z)) dx(z) = sum_i sum_m c[i, m-1] / (z - e_i)^m dz``.

    Attributes
    ----------
    curve : RationalSpectralCurve
    poles : ndarray
        Branch points ``e_i``.
    coeffs : ndarray, shape (n_branch, 4)
        Partial-fraction coefficients for pole orders 1..4.
    radius : ndarray
        Contour radius used around each branch point.
    """

    curve: RationalSpectralCurve
    poles: np.ndarray
    coeffs: np.ndarray
    radius: np.ndarray

    def __call__(self, z):
        """Value of the differential divided by ``dz``."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for e, c in zip(self.poles, self.coeffs):
            for m in range(4):
                out = out + c[m] / (z - e) ** (m + 1)
        return out

    def residues(self) -> np.ndarray:
        """Residue at each branch point (the coefficient of the simple pole)."""
        return self.coeffs[:, 0]

    def series_at_infinity(self, order: int) -> Laurent:
        """Expansion in ``1/z`` down to ``z^-order``."""
        terms = {}
        for e, c in zip(self.poles, self.coeffs):
            for m in range(1, 5):
                # (z - e)^-m = sum_j binom(m+j-1, j) e^j z^(-m-j)
                for j in range(0, order - m + 1):
                    terms[-m - j] = terms.get(-m - j, 0) + c[m - 1] * math.comb(m + j - 1, j) * e ** j
        return Laurent.from_dict(terms, prec=-order)

    def moments(self, kmax: int) -> np.ndarray:
        """``T_k^(1)``: coefficient of ``x^-(k+1)`` in ``W_1^(1)(x)``."""
        x = self.curve.xs
        out = np.empty(kmax + 1, dtype=complex)
        for k in range(kmax + 1):
            w = self.series_at_infinity(k + 3)
            out[k] = (x ** k * w).coef(-1) / self.curve.T
        return out.real if np.max(np.abs(out.imag)) < 1e-12 else out


def resolvent_subleading(curve: RationalSpectralCurve, n_nodes: int = 128) -> SubleadingResolvent:
    """The ``1/N^2`` correction to the resolvent at genus zero.

    Evaluates ``sum_i Res_{q->e_i} Res_{p'->q} dS_{q,inf}(p) B(q,p') /
    ((y(q)-y(p'))(x(q)-x(p')))``, with ``dS_{q,inf}(p) = dz_p / (z_p - z_q)``.
    The inner residue is exact (Taylor data of ``x`` and ``y``); the outer
    residues, expanded in partial fractions of ``z_p``, are trapezoid-rule
    contour integrals on circles around each branch point whose radius is a
    quarter of the distance to the nearest other singularity.

    Raises
    ------
    DegenerateBranchPoint
        If a branch point is not simple.
    """
    mod = curve_moduli(curve)
    e = mod.branch_points
    others = np.concatenate([e, curve.y_branch_points(), [0.0]])
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    coeffs = np.zeros((len(e), 4), dtype=complex)
    radii = np.zeros(len(e))
    for i, ei in enumerate(e):
        dist = np.abs(others - ei)
        dist = dist[dist > 1e-12]
        r = 0.25 * float(np.min(dist))
        radii[i] = r
        zq = ei + r * np.exp(1j * theta)
        R = _inner_residue(curve, zq)
        for m in range(4):
            # Res_{z_q = e} R(z_q) (z_q - e)^m, trapezoid on the circle
            coeffs[i, m] = -np.mean(R * (zq - ei) ** (m + 1))
    return SubleadingResolvent(curve=curve, poles=e, coeffs=coeffs, radius=radii)


# ---------------------------------------------------------------------------
# Physical sheets, density, E^(0)
# ---------------------------------------------------------------------------

def physical_Y(curve: RationalSpectralCurve, x):
    """``Y(x) = y(p_0(x))`` on the physical sheet (largest-modulus preimage)."""
    xs = np.atleast_1d(np.asarray(x, dtype=complex))
    out = np.array([curve.y(curve.x_preimages(v)[0]) for v in xs])
    return out if np.ndim(x) else out[0]


def physical_X(curve: RationalSpectralCurve, y):
    """``X(y) = x(p~_0(y))`` on the physical sheet of ``y`` (smallest-modulus preimage)."""
    ys = np.atleast_1d(np.asarray(y, dtype=complex))
    out = np.array([curve.x(curve.y_preimages(v)[0]) for v in ys])
    return out if np.ndim(y) else out[0]


def compose_check(curve: RationalSpectralCurve, xs) -> float:
    """``min_j |x(z~_j) - x|`` over the ``y``-preimages of ``Y(x)``.

    ``Y`` maps ``x`` to ``y(p_0(x))``; the point ``p_0(x)`` is one of the
    preimages of that ``y`` value, so continuing ``X`` to the sheet that
    contains it returns ``x``.  The largest deviation over ``xs`` is returned.
    """
    dev = 0.0
    for v in np.atleast_1d(xs):
        z0 = curve.x_preimages(v)[0]
        y0 = curve.y(z0)
        zs = curve.y_preimages(y0)
        dev = max(dev, float(np.min(np.abs(curve.x(zs) - v))) / max(1.0, abs(v)))
    return dev


def cut_endpoints(curve: RationalSpectralCurve) -> tuple:
    """Real images of the real branch points: the support of the density."""
    e = curve.branch_points()
    real = e[np.abs(e.imag) < 1e-9].real
    a = curve.x(real)
    return float(np.min(a)), float(np.max(a))


def equilibrium_density(curve: RationalSpectralCurve, x, eps: float = 1e-12) -> np.ndarray:
    """``rho(x) = Im Y(x + i0) / (pi T)`` on the cut.

    The physical preimage is tracked from ``x + i L`` down to ``x + i eps``.

    Raises
    ------
    OutsideCut
        If a point lies outside the support.
    """
    lo, hi = cut_endpoints(curve)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < lo) or np.any(xs > hi):
        raise OutsideCut(f"points outside the cut [{lo:.6f}, {hi:.6f}]")
    out = np.empty(len(xs))
    L = 4.0 * max(abs(lo), abs(hi), 1.0)
    heights = np.concatenate([np.geomspace(L, 1e-3, 60), [eps]])
    for i, v in enumerate(xs):
        z = curve.x_preimages(v + 1j * heights[0])[0]
        for h in heights[1:]:
            roots = curve.x_preimages(v + 1j * h)
            z = roots[np.argmin(np.abs(roots - z))]
        out[i] = float(np.imag(curve.y(z))) / (np.pi * curve.T)
    return out if np.ndim(x) else out[0]


def spectral_curve_E0(curve: RationalSpectralCurve) -> SpectralCurvePoly:
    """``E^(0)(x, y) = -g~_{d2+1} prod_k (y - y(z_k(x)))`` as a coefficient table.

    The product runs over the ``d2+1`` preimages of ``x``; its ``y``
    coefficients are polynomials of degree ``<= d1+1`` in ``x``, recovered
    from Chebyshev samples and tested at a held-out point.

    Raises
    ------
    InterpolationInconsistent
    """
    m = curve.model
    d1, d2 = m.d1, m.d2
    lead = -m.v2.leading

    def ycoeffs(xv):
        ys = curve.y(curve.x_preimages(xv))
        return lead * np.poly(ys)[::-1]       # ascending in y

    nodes = chebyshev_nodes(d1 + 3, 2.0)
    vals = np.array([ycoeffs(v) for v in nodes])
    V = np.vander(nodes, d1 + 2, increasing=True)
    coeffs, *_ = np.linalg.lstsq(V, vals, rcond=None)
    held = 0.83
    pred = np.vander([held], d1 + 2, increasing=True) @ coeffs
    res = float(np.max(np.abs(pred[0] - ycoeffs(held))) / max(np.max(np.abs(vals)), 1.0))
    if res > 1e-8:
        raise InterpolationInconsistent(f"E0 is not of x-degree {d1 + 1}: {res:.2e}")
    table = np.real_if_close(coeffs, tol=1e6)
    return SpectralCurvePoly(coeffs=np.real(table), source="E0", held_out=res)


def mixed_resolvent_large_n(curve: RationalSpectralCurve, x, y, E0: SpectralCurvePoly | None = None
                            ) -> complex:
    """``1 - E(x, y) / ((x - X(y)) (y - Y(x)))``."""
    E0 = spectral_curve_E0(curve) if E0 is None else E0
    return complex(1.0 - E0(x, y) / ((x - physical_X(curve, y)) * (y - physical_Y(curve, x))))
