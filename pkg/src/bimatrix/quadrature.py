"""Quadrature engine for the coupled weight and brute-force eigenvalue oracles.

Bimoments ``I_ij = int int x^i y^j exp(-(N/T)[V1(x)+V2(y)-xy]) dx dy`` are
reduced to one-dimensional moments before any quadrature is done:

* when one potential is quadratic, the corresponding integral is an exact
  Gaussian and the bimoment becomes a finite combination of moments of an
  effective one-dimensional weight;
* otherwise the coupling ``exp(c x y)`` is expanded in its (entire) Taylor
  series and ``I_ij = sum_k c^k/k! mu1_{i+k} mu2_{j+k}``.  For real
  potentials with even leading terms the series has geometric-factorial
  decay, and the truncation point is chosen adaptively.

One-dimensional moments use composite Gauss-Legendre rules in mpmath with
panel doubling; the reported error is the maximum change under the last
doubling, measured against an absolute-value majorant of each entry.

The oracles at the end of the module integrate the eigenvalue measure
directly (no determinant identities) for tiny ``N``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from mpmath.calculus.quadrature import GaussLegendre

from .errors import OracleTooLarge, QuadratureNotConverged
from .model import Potential, ValidatedModel, validate_model
from .precision import make_context, precision_mode, working_dps

__all__ = [
    "BimomentMatrix",
    "bimoment_matrix",
    "direct_density_oracle",
    "partition_function_smallN",
    "heine_oracle",
    "mixed_resolvent_oracle_n1",
]

_PANEL_DEGREE = 5  # 48 nodes per panel
_MAX_PANELS = 512


@lru_cache(maxsize=16)
def _gl_nodes(dps: int):
    """Gauss-Legendre nodes/weights on [-1, 1] as mpf tuples at ``dps``."""
    ctx = make_context(dps + 10)
    pairs = GaussLegendre(ctx).calc_nodes(_PANEL_DEGREE, ctx.prec)
    return tuple(p[0] for p in pairs), tuple(p[1] for p in pairs)


def _poly_mp(ctx, coeffs, x):
    acc = ctx.zero
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _support(U: np.ndarray, coupling: float, m_max: int, digits: int, R0: float):
    """Interval outside which ``|x|^m exp(-c U)`` is negligible for m <= m_max."""
    poly = np.polynomial.Polynomial(U)
    t = np.linspace(-R0, R0, 2001)
    base = -coupling * poly(t)
    top = max(np.max(base),
              np.max(m_max * np.log(np.abs(t) + 1e-300) + base))
    drop = (digits + 12) * math.log(10.0)

    def f(x):
        lx = math.log(abs(x)) if x != 0 else -1e300
        return max(-coupling * poly(x), m_max * lx - coupling * poly(x))

    lo, hi = -max(R0, 1.0), max(R0, 1.0)
    while f(lo) > top - drop:
        lo *= 1.1
    while f(hi) > top - drop:
        hi *= 1.1
    return lo, hi


def _moments_1d(ctx, U: np.ndarray, coupling: float, m_max: int, R0: float,
                tol: float):
    """Moments and absolute moments of ``exp(-coupling * U(x))``.

    Parameters
    ----------
    U : ndarray
        Ascending monomial coefficients of the effective potential.

    Returns
    -------
    mu, nu : list of mpf
        ``int x^m w`` and ``int |x|^m w`` for ``m = 0..m_max``.
    err : float
        Relative change under the final panel doubling.
    """
    lo, hi = _support(U, coupling, m_max, ctx.dps, R0)
    Uc = [ctx.mpf(float(c)) for c in U]
    cc = ctx.mpf(coupling)
    xs, ws = _gl_nodes(ctx.dps)
    xs = [ctx.mpf(v) for v in xs]
    ws = [ctx.mpf(v) for v in ws]

    def rule(panels):
        mu = [ctx.zero] * (m_max + 1)
        nu = [ctx.zero] * (m_max + 1)
        a = ctx.mpf(lo)
        h = (ctx.mpf(hi) - a) / panels
        for p in range(panels):
            mid = a + (p + ctx.mpf(0.5)) * h
            for t, w in zip(xs, ws):
                x = mid + t * h / 2
                val = w * h / 2 * ctx.exp(-cc * _poly_mp(ctx, Uc, x))
                ax = abs(x)
                xp = ctx.one
                axp = ctx.one
                for m in range(m_max + 1):
                    mu[m] += val * xp
                    nu[m] += val * axp
                    xp *= x
                    axp *= ax
        return mu, nu

    panels = 4
    prev = rule(panels)
    while True:
        panels *= 2
        cur = rule(panels)
        err = max(float(abs(cur[0][m] - prev[0][m]) / cur[1][m])
                  for m in range(m_max + 1))
        if err < tol:
            return cur[0], cur[1], err
        if panels >= _MAX_PANELS:
            raise QuadratureNotConverged(
                f"moment rule did not stabilize (last change {err:.3g})")
        prev = cur


@dataclass(frozen=True)
class BimomentMatrix:
    """Gram matrix of ``(x^i, y^j)`` under the coupled weight.

    Attributes
    ----------
    entries : tuple of tuple of mpf
        ``I_ij`` for ``0 <= i, j < M``.
    M : int
    error : float
        Maximum relative change under the last node doubling (per matrix).
    dps : int
        Decimal precision used.
    model : ValidatedModel
    """

    entries: tuple
    M: int
    error: float
    dps: int
    model: ValidatedModel

    def as_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries])

    def leading_minors(self):
        """Leading principal minors ``D_1..D_M`` (mpf)."""
        ctx = make_context(self.dps)
        out = []
        for n in range(1, self.M + 1):
            sub = ctx.matrix([list(r[:n]) for r in self.entries[:n]])
            out.append(ctx.det(sub))
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "I_ij"])
            for i in range(self.M):
                for j in range(self.M):
                    w.writerow([i, j, repr(float(self.entries[i][j]))])


def _gaussian_moment_polys(ctx, g1: float, g2: float, coupling, jmax: int):
    """Coefficients of ``E[Y^j]`` as polynomials in ``x``.

    ``Y`` is normal with mean ``(x - g1)/g2`` and variance ``1/(c g2)``;
    this is the exact inner integral when the potential on ``Y`` is
    quadratic.
    """
    a = 1 / ctx.mpf(g2)
    b = -ctx.mpf(g1) / ctx.mpf(g2)
    var = 1 / (ctx.mpf(coupling) * ctx.mpf(g2))
    # powers of the mean (b + a x) as polynomial coefficient lists
    mean_pows = [[ctx.one]]
    for _ in range(jmax):
        prev = mean_pows[-1]
        nxt = [ctx.zero] * (len(prev) + 1)
        for k, c in enumerate(prev):
            nxt[k] += b * c
            nxt[k + 1] += a * c
        mean_pows.append(nxt)
    polys = []
    for j in range(jmax + 1):
        coeffs = [ctx.zero] * (j + 1)
        for k in range(0, j + 1, 2):
            dfact = ctx.one
            for q in range(k - 1, 0, -2):
                dfact *= q
            pref = ctx.binomial(j, k) * var ** (k // 2) * dfact
            for l, c in enumerate(mean_pows[j - k]):
                coeffs[l] += pref * c
        polys.append(coeffs)
    return polys


def _bimoments_quadratic_y(ctx, v1: Potential, v2: Potential, coupling: float,
                           M: int, R0: float, tol: float):
    g1, g2 = v2.g(1), v2.g(2)
    # effective potential V1(x) - (x - g1)^2 / (2 g2)
    U = np.zeros(max(v1.degree + 1, 3))
    U[: v1.degree + 1] += v1.monomial()
    U[0] -= g1 * g1 / (2 * g2)
    U[1] += g1 / g2
    U[2] -= 1.0 / (2 * g2)
    mu, nu, err = _moments_1d(ctx, U, coupling, 2 * (M - 1), R0, tol)
    polys = _gaussian_moment_polys(ctx, g1, g2, coupling, M - 1)
    pref = ctx.sqrt(2 * ctx.pi / (ctx.mpf(coupling) * ctx.mpf(g2)))
    I = [[ctx.zero] * M for _ in range(M)]
    S = [[ctx.zero] * M for _ in range(M)]
    for i in range(M):
        for j in range(M):
            s = ctx.zero
            sa = ctx.zero
            for l, c in enumerate(polys[j]):
                s += c * mu[i + l]
                sa += abs(c) * nu[i + l]
            I[i][j] = pref * s
            S[i][j] = pref * sa
    return I, S, err


def _bimoments_series(ctx, v1: Potential, v2: Potential, coupling: float,
                      M: int, R1: float, R2: float, tol: float):
    """Taylor expansion of the coupling; moments are computed once at a
    generous order and the series is cut where terms drop below ``tol``."""
    c = ctx.mpf(coupling)
    K = 40
    while True:
        mmax = 2 * (M - 1) + K
        mu1, nu1, e1 = _moments_1d(ctx, np.concatenate([[0.0], v1.monomial()[1:]]),
                                   coupling, mmax, R1, tol)
        mu2, nu2, e2 = _moments_1d(ctx, np.concatenate([[0.0], v2.monomial()[1:]]),
                                   coupling, mmax, R2, tol)
        I = [[ctx.zero] * M for _ in range(M)]
        S = [[ctx.zero] * M for _ in range(M)]
        tail = 0.0
        for i in range(M):
            for j in range(M):
                s = ctx.zero
                sa = ctx.zero
                fac = ctx.one
                last = ctx.zero
                for k in range(K + 1):
                    if k:
                        fac *= c / k
                    term = fac * mu1[i + k] * mu2[j + k]
                    s += term
                    sa += fac * nu1[i + k] * nu2[j + k]
                    if k >= K - 3:
                        last = max(last, fac * nu1[i + k] * nu2[j + k])
                I[i][j] = s
                S[i][j] = sa
                tail = max(tail, float(last / sa))
        if tail < tol:
            return I, S, max(e1, e2, tail)
        K *= 2
        if K > 640:
            raise QuadratureNotConverged(
                "coupling series did not converge; increase precision or lower N/T")


def bimoment_matrix(model, M: int, mode: str | None = None) -> BimomentMatrix:
    """Bimoment matrix ``I_ij`` for ``0 <= i, j < M``.

    Parameters
    ----------
    model : ValidatedModel or ModelSpec
    M : int
        Truncation size.
    mode : {"double", "extended"}, optional
        Overrides ``BIMATRIX_PRECISION``.

    Raises
    ------
    QuadratureNotConverged
    """
    model = validate_model(model)
    if M < 1:
        raise ValueError("M must be at least 1")
    mode = precision_mode(mode)
    dps = working_dps(M, mode)
    ctx = make_context(dps)
    tol = 1e-12 if mode == "double" else 10.0 ** (-(dps - 12))
    c = model.coupling
    v1, v2 = model.v1, model.v2
    if v2.degree == 2:
        I, S, err = _bimoments_quadratic_y(ctx, v1, v2, c, M, model.R_x, tol)
    elif v1.degree == 2:
        It, St, err = _bimoments_quadratic_y(ctx, v2, v1, c, M, model.R_y, tol)
        I = [list(r) for r in zip(*It)]
        S = [list(r) for r in zip(*St)]
    else:
        I, S, err = _bimoments_series(ctx, v1, v2, c, M, model.R_x, model.R_y, tol)
    if not I[0][0] > 0:
        raise QuadratureNotConverged("I_00 is not positive")
    return BimomentMatrix(entries=tuple(tuple(r) for r in I), M=M, error=err,
                          dps=dps, model=model)


# ---------------------------------------------------------------------------
# brute-force oracles on the eigenvalue measure
# ---------------------------------------------------------------------------

def _w(model: ValidatedModel, x, y):
    return np.exp(-model.coupling * (model.v1(x) + model.v2(y) - x * y))


def _critical(v: Potential, s: float) -> float:
    """Global minimizer of ``V(t) - s t``."""
    c = v.deriv_monomial().copy()
    c[0] -= s
    roots = np.roots(c[::-1]) if len(c) > 1 else np.array([])
    real = roots[np.abs(roots.imag) < 1e-9 * (1 + np.abs(roots.real))].real
    return float(real[np.argmin(v(real) - s * real)])


def _rule_1d(center: float, curvature: float, n: int):
    """Gauss-Hermite rule adapted to a Gaussian envelope."""
    t, w = np.polynomial.hermite_e.hermegauss(n)
    s = 1.0 / math.sqrt(curvature)
    return center + s * t, w * np.exp(t * t / 2) * s


def _rule_pair(model: ValidatedModel, n: int):
    """2D rule for ``int int f(x, y) w(x, y)`` built on the Hessian envelope."""
    x0, y0 = model.center
    c = model.coupling
    H = c * np.array([[model.v1.deriv2(x0), -1.0], [-1.0, model.v2.deriv2(y0)]])
    L = np.linalg.cholesky(np.linalg.inv(H))
    t, w = np.polynomial.hermite_e.hermegauss(n)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    W = np.outer(w, w) * np.exp((T1 ** 2 + T2 ** 2) / 2) * abs(np.linalg.det(L))
    X = x0 + L[0, 0] * T1 + L[0, 1] * T2
    Y = y0 + L[1, 0] * T1 + L[1, 1] * T2
    X, Y, W = X.ravel(), Y.ravel(), W.ravel()
    return X, Y, W * _w(model, X, Y)


def _pair_nodes(model, xi, yi, n):
    """Nodes/weights for one eigenvalue pair, some coordinates possibly fixed.

    Weights include the pair factor ``w(x, y)``.
    """
    c = model.coupling
    if xi is None and yi is None:
        return _rule_pair(model, n)
    if xi is not None and yi is not None:
        return (np.array([float(xi)]), np.array([float(yi)]),
                np.array([_w(model, float(xi), float(yi))]))
    if xi is not None:
        ys = _critical(model.v2, float(xi))
        Y, W = _rule_1d(ys, c * max(model.v2.deriv2(ys), 1e-3), n)
        X = np.full_like(Y, float(xi))
    else:
        xs = _critical(model.v1, float(yi))
        X, W = _rule_1d(xs, c * max(model.v1.deriv2(xs), 1e-3), n)
        Y = np.full_like(X, float(yi))
    return X, Y, W * _w(model, X, Y)


def _vandermonde(cols):
    out = 1.0
    for i, j in itertools.combinations(range(len(cols)), 2):
        out = out * (cols[j] - cols[i])
    return out


def _eigen_integral(model, fixed_x, fixed_y, n, extra=None):
    """``int Delta(x) Delta(y) prod_i w(x_i, y_i) * extra(x)`` over free vars."""
    N = len(fixed_x)
    rules = [_pair_nodes(model, fixed_x[i], fixed_y[i], n) for i in range(N)]
    sizes = [len(r[2]) for r in rules]
    grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
    idx = [g.ravel() for g in grids]
    xs = [rules[i][0][idx[i]] for i in range(N)]
    ys = [rules[i][1][idx[i]] for i in range(N)]
    ws = np.ones_like(xs[0])
    for i in range(N):
        ws = ws * rules[i][2][idx[i]]
    f = _vandermonde(xs) * _vandermonde(ys) * ws
    if extra is None:
        return float(np.sum(f))
    return np.array([np.sum(f * e) for e in extra(xs)])


_ORACLE_NODES = {1: 96, 2: 48, 3: 14}


def partition_function_smallN(model, n_nodes: int | None = None):
    """``Z = int Delta(x) Delta(y) prod exp(-(N/T)[V1+V2-x_i y_i])`` for N <= 3.

    Returns
    -------
    Z : float
    err : float
        Relative change against a rule with fewer nodes.
    """
    model = validate_model(model)
    N = model.N
    if N > 3:
        raise OracleTooLarge("partition-function oracle supports N <= 3")
    n = n_nodes or _ORACLE_NODES[N]
    Z = _eigen_integral(model, [None] * N, [None] * N, n)
    Z2 = _eigen_integral(model, [None] * N, [None] * N, max(n - 6, 4))
    return Z, abs(Z - Z2) / abs(Z)


def direct_density_oracle(model, r: int, s: int, points, n_nodes: int | None = None):
    """Probability densities ``rho_{r;s}`` by direct quadrature, N <= 2.

    Parameters
    ----------
    r, s : int
        Number of x and y arguments, each 0 or 1 (``(2, 0)`` and ``(0, 2)``
        are accepted as well when N = 2).
    points : sequence
        For ``(1, 0)`` or ``(0, 1)`` a sequence of floats; for ``(1, 1)`` a
        sequence of ``(x, y)``; for ``(2, 0)``/``(0, 2)`` pairs of the same
        variable.

    Returns
    -------
    ndarray
        Density values, normalized so that ``int rho_{1;0} = 1``.
    """
    model = validate_model(model)
    N = model.N
    if N > 2:
        raise OracleTooLarge("density oracle supports N <= 2")
    if r + s < 1 or r > N or s > N or r + s > 2:
        raise ValueError("unsupported (r, s) for this N")
    n = n_nodes or _ORACLE_NODES[N]
    Z = _eigen_integral(model, [None] * N, [None] * N, n)
    out = []
    for p in points:
        fx = [None] * N
        fy = [None] * N
        if (r, s) == (1, 0):
            fx[0] = p
        elif (r, s) == (0, 1):
            fy[0] = p
        elif (r, s) == (2, 0):
            fx[0], fx[1] = p
        elif (r, s) == (0, 2):
            fy[0], fy[1] = p
        if (r, s) == (1, 1):
            x, y = p
            val = _eigen_integral(model, [x] + [None] * (N - 1),
                                  [y] + [None] * (N - 1), n) / N
            if N == 2:
                val += (1 - 1 / N) * _eigen_integral(model, [x, None], [None, y], n)
        else:
            val = _eigen_integral(model, fx, fy, n)
        out.append(val / Z)
    return np.array(out)


def heine_oracle(model, n: int, xs, n_nodes: int = 48):
    """``pi_n(x) = <det(x - M1)>`` in the ``n x n`` model with the same weight.

    The eigenvalue integrals over ``n`` pairs are done by brute force.
    """
    model = validate_model(model)
    if n > 2:
        raise OracleTooLarge("Heine oracle supports n <= 2")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if n == 0:
        return np.ones_like(xs)

    def charpoly(cols):
        vals = []
        for x in xs:
            p = 1.0
            for c in cols:
                p = p * (x - c)
            vals.append(p)
        return vals

    num = _eigen_integral(model, [None] * n, [None] * n, n_nodes, extra=charpoly)
    den = _eigen_integral(model, [None] * n, [None] * n, n_nodes)
    return num / den


def mixed_resolvent_oracle_n1(model, x: complex, y: complex, n_nodes: int = 128):
    """``<(x - M1)^{-1} (y - M2)^{-1}>`` at N = 1 by direct 2D quadrature."""
    model = validate_model(model)
    if model.N != 1:
        raise OracleTooLarge("mixed-resolvent oracle is for N = 1")
    X, Y, W = _rule_pair(model, n_nodes)
    Z = np.sum(W)
    return complex(np.sum(W / ((x - X) * (y - Y))) / Z)
