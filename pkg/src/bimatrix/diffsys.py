"""Folding matrices, the finite-n differential systems and their spectral curve.

On the window ``Psi_n = (psi_{n-d2}, ..., psi_n)`` the recurrence
``x psi = Q psi`` can be solved for every other ``psi_m`` as a polynomial
combination of the window: ``psi_m = sum_j F_n(x)_{mj} psi_j``.  The same
holds for the dual window ``(phi~_{n-1}, ..., phi~_{n+d2-1})``.  Applying
the derivative operator to the folded vector gives the linear systems

    -(T/N) d/dx Psi_n = D1(x) Psi_n,      (T/N) d/dx Phi~_n = D1~(x) Phi~_n,

whose entries are polynomials of degree ``<= d1`` in ``x``.  Exchanging the
roles of the two operators gives ``D2`` and ``D2~`` acting in ``y``.  All
four share the characteristic polynomial ``E_n(x, y)``.

Polynomials are represented by their values at scaled Chebyshev nodes and
recovered by interpolation; the known degree bounds make this exact, and a
held-out node checks it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_triangular

from .errors import (ConstructionsDisagree, InterpolationInconsistent,
                     TruncationTooSmall)
from .kernels import cd_matrices
from .operators import BandOperator

__all__ = [
    "FoldingMatrix",
    "folding_matrix",
    "dual_folding_matrix",
    "folding_residual",
    "DifferentialSystem",
    "build_system",
    "build_D1",
    "duality_residual",
    "derivative_residual",
    "trace_identity_residual",
    "liouville_residual",
    "SpectralCurvePoly",
    "spectral_curve_finite_n",
    "curve_agreement",
    "chebyshev_nodes",
]

INTERP_TOL = 1e-8
AGREE_TOL = 1e-6


def chebyshev_nodes(k: int, R: float) -> np.ndarray:
    """``k`` Chebyshev points of the first kind scaled to ``[-R, R]``."""
    j = np.arange(k)
    return R * np.cos((2 * j + 1) * np.pi / (2 * k))


# ---------------------------------------------------------------------------
# Folding
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FoldingMatrix:
    """Rows of a folding matrix at a single point.

    Attributes
    ----------
    n : int
    x : complex or float
    rows : ndarray of int
        Row labels ``m``.
    window : tuple of int
        Column labels ``[start, stop)``.
    matrix : ndarray, shape (len(rows), stop - start)
    """

    n: int
    x: complex
    rows: np.ndarray
    window: tuple
    matrix: np.ndarray

    def row(self, m: int) -> np.ndarray:
        return self.matrix[list(self.rows).index(m)]


def _check_window(X: BandOperator, Y: BandOperator, n: int):
    d, e = X.lower, Y.lower
    if n <= d or n + d + e + 3 >= X.size:
        raise TruncationTooSmall(
            f"window n={n} needs d < n and n + {d + e + 3} < truncation {X.size}")


def _shift_up(g, d, K):
    """``(gamma^{-1} Lambda)^d``: entry ``(m, m+d) = 1/(g_m ... g_{m+d-1})``."""
    S = np.zeros((K, K))
    for m in range(K - d):
        S[m, m + d] = 1.0 / np.prod(g[m:m + d])
    return S


def _shift_down(g, d, K):
    """``(Lambda^t gamma^{-1})^d``: entry ``(m, m-d) = 1/(g_{m-d} ... g_{m-1})``."""
    S = np.zeros((K, K))
    for m in range(d, K):
        S[m, m - d] = 1.0 / np.prod(g[m - d:m])
    return S


def _full_fold(X: BandOperator, n: int, x) -> np.ndarray:
    """``F_n(x)`` on every truncation row, columns ``[n-d, n]``.

    The one-sided inverses are ``(1 - Q_L)^{-1}`` and ``(1 - Q_R)^{-1}`` with
    ``Q_L`` strictly upper and ``Q_R`` strictly lower triangular, so their
    Neumann series terminate; on a truncation they equal triangular
    inverses, with the last ``d`` rows of the upper one (which would need
    the missing row ``K``) replaced by identity rows.
    """
    K, d, g = X.size, X.lower, X.gamma
    dtype = complex if np.iscomplexobj(x) else float
    Qx = X.matrix.astype(dtype) - x * np.eye(K)
    Su = _shift_up(g, d, K)
    Sd = _shift_down(g, 1, K)
    UL = (Su @ Qx) / X.lead                     # = 1 - Q_L
    UL[K - d:] = np.eye(K)[K - d:]
    inv_L = solve_triangular(UL, Su.astype(dtype), lower=False) / X.lead
    UR = Sd @ Qx                                # = 1 - Q_R (without Pi_0)
    UR[0, 0] = 1.0
    inv_R = solve_triangular(UR, Sd.astype(dtype), lower=True)
    A = _commutator(X, n)
    return (inv_L - inv_R) @ A[:, n - d:n + 1]


def _full_dual_fold(X: BandOperator, n: int, x) -> np.ndarray:
    """``F~_n(x)`` on every row, columns ``[n-1, n+d-1]``."""
    K, d, g = X.size, X.lower, X.gamma
    dtype = complex if np.iscomplexobj(x) else float
    QxT = (X.matrix.astype(dtype) - x * np.eye(K)).T
    Sd = _shift_down(g, d, K)
    Su = _shift_up(g, 1, K)
    UL = (Sd @ QxT) / X.lead                    # = 1 - Q~_L off the first d rows
    UL[:d] = np.eye(K)[:d]
    inv_L = solve_triangular(UL, Sd.astype(dtype), lower=True) / X.lead
    UR = Su @ QxT                               # = 1 - Q~_R
    UR[K - 1] = np.eye(K)[K - 1]
    inv_R = solve_triangular(UR, Su.astype(dtype), lower=False)
    A = _commutator(X, n)
    return (inv_L - inv_R) @ A.T[:, n - 1:n + d]


def _commutator(X: BandOperator, n: int) -> np.ndarray:
    proj = np.zeros(X.size)
    proj[:n] = 1.0
    return X.matrix * proj[None, :] - proj[:, None] * X.matrix


def folding_matrix(Q: BandOperator, n: int, x, rows=None) -> FoldingMatrix:
    """Rows ``m`` of the folding matrix onto ``(psi_{n-d}, ..., psi_n)``.

    Parameters
    ----------
    Q : BandOperator
        Multiplication operator of the folded variable (bandwidth ``d``).
    n : int
        Window index.
    x : float or complex
    rows : iterable of int, optional
        Defaults to ``[n-d-3, n+3]`` clipped at zero.

    Raises
    ------
    TruncationTooSmall
        If the window is too close to either end of the truncation.
    """
    d = Q.lower
    if n < d or n + 2 * d + 4 >= Q.size:
        raise TruncationTooSmall(f"window n={n} too close to the truncation {Q.size}")
    rows = np.arange(max(0, n - d - 3), n + 4) if rows is None else np.asarray(list(rows))
    if rows.max() + d + 2 >= Q.size:
        raise TruncationTooSmall("requested folding rows reach the truncation edge")
    F = _full_fold(Q, n, x)
    return FoldingMatrix(n=n, x=x, rows=rows, window=(n - d, n + 1), matrix=F[rows])


def dual_folding_matrix(Q: BandOperator, n: int, x, rows=None) -> FoldingMatrix:
    """Rows of the folding matrix onto ``(phi~_{n-1}, ..., phi~_{n+d-1})``."""
    d = Q.lower
    if n < 1 or n + 2 * d + 4 >= Q.size:
        raise TruncationTooSmall(f"window n={n} too close to the truncation {Q.size}")
    rows = np.arange(max(0, n - 4), n + d + 3) if rows is None else np.asarray(list(rows))
    F = _full_dual_fold(Q, n, x)
    return FoldingMatrix(n=n, x=x, rows=rows, window=(n - 1, n + d), matrix=F[rows])


def folding_residual(family, fold: FoldingMatrix, dual: bool = False) -> float:
    """Relative deviation of ``f_m(x) = sum_j F_mj f_j(x)`` over the rows."""
    top = int(max(fold.rows.max(), fold.window[1])) + 1
    x = float(np.real(fold.x))
    if dual:
        vals = family.transform_values([x], top, "x")[0]
    else:
        vals = family.wave_values([x], top, "x")[0]
    lo, hi = fold.window
    pred = fold.matrix @ vals[lo:hi]
    ref = vals[fold.rows]
    scale = max(np.max(np.abs(vals[: top])), 1e-300)
    return float(np.max(np.abs(pred - ref)) / scale)


# ---------------------------------------------------------------------------
# Differential systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DifferentialSystem:
    """Polynomial matrix ``D(t) = sum_k coeffs[k] t^k``.

    Attributes
    ----------
    kind : str
        ``"D1"``, ``"D1~"``, ``"D2"`` or ``"D2~"``.
    n : int
    window : tuple of int
        Index range ``[start, stop)`` of the vector the system acts on.
    variable : str
        ``"x"`` for the D1 pair, ``"y"`` for the D2 pair.
    coeffs : ndarray, shape (deg+1, s, s)
    lead : float
        Leading coefficient of the potential entering the curve normalization.
    interpolation_residual : float
        Held-out node deviation of the interpolant.
    discrepancy : float or None
        Largest coefficient difference between the folding construction and
        the explicit formula (``D1`` only).
    """

    kind: str
    n: int
    window: tuple
    variable: str
    coeffs: np.ndarray
    lead: float
    interpolation_residual: float
    discrepancy: float | None = None

    @property
    def size(self) -> int:
        return self.coeffs.shape[1]

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    def __call__(self, t) -> np.ndarray:
        acc = np.zeros(self.coeffs.shape[1:], dtype=complex if np.iscomplexobj(t) else float)
        for c in self.coeffs[::-1]:
            acc = acc * t + c
        return acc

    def trace_coeffs(self) -> np.ndarray:
        return np.trace(self.coeffs, axis1=1, axis2=2)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "window": list(self.window),
                "variable": self.variable, "coeffs": self.coeffs.tolist(),
                "interpolation_residual": self.interpolation_residual,
                "discrepancy": self.discrepancy}


def _interpolate(sample, nodes, held_out, deg):
    """Fit entrywise polynomials of degree ``deg`` and test a held-out node."""
    vals = np.array([sample(t) for t in nodes])
    V = np.vander(nodes, deg + 1, increasing=True)
    coeffs, *_ = np.linalg.lstsq(V, vals.reshape(len(nodes), -1), rcond=None)
    coeffs = coeffs.reshape((deg + 1,) + vals.shape[1:])
    ref = sample(held_out)
    pred = sum(c * held_out ** k for k, c in enumerate(coeffs))
    scale = max(np.max(np.abs(vals)), np.max(np.abs(ref)), 1e-300)
    return coeffs, float(np.max(np.abs(pred - ref)) / scale)


def _system_values(X: BandOperator, Y: BandOperator, n: int, t, dual: bool):
    d = X.lower
    if dual:
        F = _full_dual_fold(X, n, t)
        return (Y.matrix @ F)[n - 1:n + d]
    F = _full_fold(X, n, t)
    return (Y.matrix.T @ F)[n - d:n + 1]


def _explicit_D1(X: BandOperator, Y: BandOperator, V, n: int, t) -> np.ndarray:
    """Three-term formula: upper part of ``V'(X)``, companion block, CD correction."""
    d = X.lower
    K = X.size
    Xm, g = X.matrix, X.gamma
    VX = V.deriv_of_matrix(Xm)
    s = d + 1
    lo = n - d
    D = np.zeros((s, s))
    # upper-triangular part of V'(X) on rows/cols n-d..n-1, V'(t) in the corner
    for i in range(d):
        for j in range(i, d):
            D[i, j] = VX[lo + i, lo + j]
    D[d, d] = V.deriv(t)
    # gamma times the companion matrix of the recurrence at row n-1
    a = lambda k: Xm[n - 1, n - 1 - k]
    C = np.zeros((s, s))
    for j in range(d - 1):
        C[0, j] = -a(d - 1 - j) / a(d)
    C[0, d - 1] = (t - a(0)) / a(d)
    C[0, d] = -g[n - 1] / a(d)
    for i in range(1, s):
        C[i, i - 1] = 1.0
    D += np.diag(g[n - d - 1:n]) @ C
    # divided difference (V'(X) - V'(t)) / (X - t) as a matrix polynomial
    coeffs = V.deriv_monomial()
    DD = np.zeros((K, K))
    Xp = [np.eye(K)]
    for _ in range(len(coeffs)):
        Xp.append(Xp[-1] @ Xm)
    for k in range(1, len(coeffs)):
        for i in range(k):
            DD += coeffs[k] * t ** (k - 1 - i) * Xp[i]
    A = _commutator(X, n)
    D -= DD[lo:n + 1, n - 1:n + d] @ A[n - 1:n + d, lo:n + 1]
    return D


def build_system(Q: BandOperator, P: BandOperator, model, n: int, kind: str = "D1",
                 R: float | None = None) -> DifferentialSystem:
    """Build one of the four systems by folding and interpolation.

    ``kind`` is ``"D1"``, ``"D1~"`` (variable x, folding with Q) or ``"D2"``,
    ``"D2~"`` (variable y, folding with P).  For ``"D1"`` and ``"D2"`` the
    explicit formula is evaluated as an independent second construction.

    Raises
    ------
    TruncationTooSmall
    InterpolationInconsistent
        If the held-out node deviates by more than 1e-8.
    ConstructionsDisagree
        If the two constructions differ by more than 1e-6.
    """
    if kind in ("D1", "D1~"):
        X, Y, V, var = Q, P, model.v1, "x"
        R = model.R_x if R is None else R
    elif kind in ("D2", "D2~"):
        X, Y, V, var = P, Q, model.v2, "y"
        R = model.R_y if R is None else R
    else:
        raise ValueError(f"unknown system {kind!r}")
    dual = kind.endswith("~")
    _check_window(X, Y, n)
    deg = Y.lower
    nodes = chebyshev_nodes(deg + 2, R)
    held = 0.37 * R
    coeffs, res = _interpolate(lambda t: _system_values(X, Y, n, t, dual), nodes, held, deg)
    if res > INTERP_TOL:
        raise InterpolationInconsistent(f"{kind}: held-out deviation {res:.2e}")
    disc = None
    if not dual:
        cB, resB = _interpolate(lambda t: _explicit_D1(X, Y, V, n, t), nodes, held, deg)
        scale = max(np.max(np.abs(coeffs)), 1.0)
        disc = float(max(np.max(np.abs(coeffs - cB)) / scale, resB))
        if disc > AGREE_TOL:
            raise ConstructionsDisagree(f"{kind}: constructions differ by {disc:.2e}")
    window = (n - 1, n + X.lower) if dual else (n - X.lower, n + 1)
    return DifferentialSystem(kind=kind, n=n, window=window, variable=var, coeffs=coeffs,
                              lead=X.lead, interpolation_residual=res, discrepancy=disc)


def build_D1(family, Q: BandOperator, P: BandOperator, n: int) -> DifferentialSystem:
    """``D1`` from both constructions (folding and explicit formula)."""
    return build_system(Q, P, family.model, n, "D1")


def duality_residual(D: DifferentialSystem, Dt: DifferentialSystem, Q: BandOperator,
                     P: BandOperator, xs=None) -> float:
    """``max |A_n D(x) - D~(x)^t A_n|`` relative to the matrix scale.

    Uses ``A_n`` for the D1 pair and ``B_n`` for the D2 pair; the sample
    set always contains 0.
    """
    n = D.n
    X = Q if D.variable == "x" else P
    A = _commutator(X, n)[Dt.window[0]:Dt.window[1], D.window[0]:D.window[1]]
    if xs is None:
        xs = np.concatenate([[0.0], np.linspace(-1.5, 1.5, 9)])
    dev, scale = 0.0, 0.0
    for x in xs:
        L = A @ D(x)
        Rm = Dt(x).T @ A
        dev = max(dev, float(np.max(np.abs(L - Rm))))
        scale = max(scale, float(np.max(np.abs(L))))
    return dev / max(scale, 1e-300)


def derivative_residual(family, D: DifferentialSystem, xs=None) -> float:
    """Check the system against the wave functions.

    For ``D1``: ``-(T/N) psi' = D1 Psi`` with the exact derivative.  For
    ``D1~``: ``(T/N) phi~' = D1~ Phi~`` with a central difference of the
    transforms (step 1e-4).  Returns the largest relative deviation.
    """
    model = family.model
    if D.variable != "x":
        raise ValueError("derivative check is implemented for the x systems")
    xs = np.linspace(-1.6, 1.6, 10) if xs is None else np.asarray(xs, dtype=float)
    lo, hi = D.window
    tn = model.T / model.N
    if D.kind == "D1":
        vals = family.wave_values(xs, hi, "x")[:, lo:hi]
        der = -tn * family.wave_derivative(xs, hi, "x")[:, lo:hi]
    else:
        h = 1e-4
        vals = family.transform_values(xs, hi, "x")[:, lo:hi]
        up = family.transform_values(xs + h, hi, "x")[:, lo:hi]
        dn = family.transform_values(xs - h, hi, "x")[:, lo:hi]
        der = tn * (up - dn) / (2 * h)
    pred = np.array([D(x) @ v for x, v in zip(xs, vals)])
    return float(np.max(np.abs(pred - der)) / max(np.max(np.abs(der)), 1e-300))


def expected_trace(model, kind: str = "D1~") -> np.ndarray:
    """Predicted ascending coefficients of ``tr D1~(x)`` (or ``tr D2~(y)``).

    ``V1'(x) - g~_{d2}/g~_{d2+1}``, plus ``x / g~_2`` when ``d2 = 1``: in that
    case ``V2'`` is linear and the recurrence coefficient of the leading
    term contributes the extra multiple of ``x``.
    """
    va, vb = (model.v1, model.v2) if kind.startswith("D1") else (model.v2, model.v1)
    c = np.array(va.deriv_monomial(), dtype=float)
    db = vb.d
    c[0] -= vb.g(db) / vb.leading
    if db == 1:
        c = np.pad(c, (0, max(0, 2 - len(c))))
        c[1] += 1.0 / vb.leading
    return c


def trace_identity_residual(D: DifferentialSystem, model) -> float:
    """Coefficientwise deviation of ``tr D~`` from :func:`expected_trace`."""
    got = D.trace_coeffs()
    exp = expected_trace(model, D.kind)
    k = max(len(got), len(exp))
    got = np.pad(got, (0, k - len(got)))
    exp = np.pad(exp, (0, k - len(exp)))
    return float(np.max(np.abs(got - exp)) / max(np.max(np.abs(exp)), 1.0))


def liouville_residual(D: DifferentialSystem, model, x0: float = 0.0,
                       xs=(0.3, 0.6, 0.9)) -> float:
    """Propagate a fundamental solution and compare ``(log det)'`` with the trace.

    Solves ``(T/N) Phi' = D(x) Phi`` from the identity at ``x0`` and checks
    ``d/dx log det Phi = (N/T) tr D(x)`` by central differences.
    """
    c = model.N / model.T
    s = D.size

    def rhs(x, y):
        return (c * D(x) @ y.reshape(s, s)).ravel()

    pts = sorted(set([x0] + [x + dx for x in xs for dx in (-1e-3, 1e-3)]))
    sol = solve_ivp(rhs, (x0, max(pts)), np.eye(s).ravel(), t_eval=[p for p in pts if p >= x0],
                    rtol=1e-12, atol=1e-14, method="DOP853")
    dets = {t: np.linalg.det(sol.y[:, i].reshape(s, s)) for i, t in enumerate(sol.t)}
    dev = 0.0
    for x in xs:
        a, b = dets[x - 1e-3], dets[x + 1e-3]
        num = (np.log(abs(b)) - np.log(abs(a))) / 2e-3
        ref = c * np.trace(D(x))
        dev = max(dev, abs(num - ref) / max(abs(ref), 1.0))
    return float(dev)


# ---------------------------------------------------------------------------
# Spectral curve
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralCurvePoly:
    """``E(x, y) = sum_ij coeffs[i, j] x^i y^j``.

    Attributes
    ----------
    coeffs : ndarray, shape (d1+2, d2+2)
    source : str
        The system the table was computed from.
    held_out : float
        Relative interpolation residual at a held-out point.
    """

    coeffs: np.ndarray
    source: str
    held_out: float

    def __call__(self, x, y):
        return np.polynomial.polynomial.polyval2d(x, y, self.coeffs)

    def monic(self) -> np.ndarray:
        """Coefficients divided by the ``y^{d2+1}`` coefficient."""
        return self.coeffs / self.coeffs[0, -1]

    def to_dict(self) -> dict:
        return {"source": self.source, "held_out": self.held_out,
                "coeffs": self.coeffs.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def spectral_curve_finite_n(D: DifferentialSystem, model, R: float | None = None
                            ) -> SpectralCurvePoly:
    """``E_n(x, y)`` from the characteristic polynomial of one system.

    For the x systems ``E_n = g~_{d2+1} det(y - D(x))``; for the y systems
    ``E_n = g_{d1+1} det(x - D(y))``.  The determinant is sampled on a
    ``(d1+2) x (d2+2)`` Chebyshev grid and interpolated.

    Raises
    ------
    InterpolationInconsistent
        If a held-out point deviates by more than 1e-8 relative.
    """
    d1, d2 = model.d1, model.d2
    R = 1.0 if R is None else R
    xs = chebyshev_nodes(d1 + 2, R)
    ys = chebyshev_nodes(d2 + 2, R)
    s = D.size

    def E(x, y):
        if D.variable == "x":
            return D.lead * np.linalg.det(y * np.eye(s) - D(x))
        return D.lead * np.linalg.det(x * np.eye(s) - D(y))

    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vals = np.vectorize(E)(X, Y)
    V = np.polynomial.polynomial.polyvander2d(X.ravel(), Y.ravel(), [d1 + 1, d2 + 1])
    coeffs = np.linalg.solve(V, vals.ravel()).reshape(d1 + 2, d2 + 2)
    xh, yh = 0.41 * R, -0.29 * R
    ref = E(xh, yh)
    pred = np.polynomial.polynomial.polyval2d(xh, yh, coeffs)
    held = float(abs(pred - ref) / max(np.max(np.abs(vals)), abs(ref), 1e-300))
    if held > INTERP_TOL:
        raise InterpolationInconsistent(
            f"{D.kind}: det is not of degree ({d1 + 1}, {d2 + 1}); held-out {held:.2e}")
    return SpectralCurvePoly(coeffs=coeffs, source=D.kind, held_out=held)


def curve_agreement(curves) -> float:
    """Largest coefficient difference between tables, relative to their scale."""
    ref = curves[0].coeffs
    scale = max(np.max(np.abs(ref)), 1e-300)
    return float(max(np.max(np.abs(c.coeffs - ref)) for c in curves[1:]) / scale)
