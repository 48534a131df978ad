"""Monic biorthogonal polynomials, norms, wave functions and their transforms.

The bimoment matrix is factored as ``I = L D U`` (Doolittle, no pivoting;
the leading minors are positive for Hermitian models).  Then

* ``Pi = L^{-1}`` holds the monomial coefficients of ``pi_n`` in row n,
* ``Sigma = (U^{-1})^T`` holds those of ``sigma_n``,
* ``h_n = D_nn``,

and ``Pi I Sigma^T = D`` is biorthogonality written as a matrix identity.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import QuadratureNotConverged, SingularMinor
from .model import Potential, ValidatedModel, validate_model
from .precision import make_context, precision_mode
from .quadrature import (BimomentMatrix, _gl_nodes, _support, bimoment_matrix,
                         heine_oracle)

__all__ = [
    "BiorthogonalFamily",
    "orthogonalize",
    "heine_check",
    "fourier_transform_wavefunction",
    "parity_defect",
    "build_family",
]

# precision used for evaluating polynomials and transforms on grids
EVAL_DPS = 40


@dataclass(frozen=True, eq=False)
class BiorthogonalFamily:
    """Monic families ``pi_n``, ``sigma_n`` for ``n < M`` and norms ``h_n``.

    Attributes
    ----------
    pi_coeffs, sigma_coeffs : tuple of tuple of mpf
        Row ``n`` holds the ascending monomial coefficients (length n+1).
    norms : tuple of mpf
    residual : float
        ``max |<pi_n, sigma_m> - h_n delta_nm| / h_n``.
    """

    model: ValidatedModel
    pi_coeffs: tuple
    sigma_coeffs: tuple
    norms: tuple
    residual: float
    dps: int
    bimoments: BimomentMatrix

    @property
    def M(self) -> int:
        return len(self.norms)

    @property
    def max_degree(self) -> int:
        return self.M - 1

    @cached_property
    def h(self) -> np.ndarray:
        return np.array([float(v) for v in self.norms])

    @cached_property
    def gamma(self) -> np.ndarray:
        """``gamma_n = sqrt(h_{n+1}/h_n)`` for ``n < M-1``."""
        ctx = make_context(self.dps)
        return np.array([float(ctx.sqrt(self.norms[n + 1] / self.norms[n]))
                         for n in range(self.M - 1)])

    def pi_float(self) -> np.ndarray:
        out = np.zeros((self.M, self.M))
        for n, row in enumerate(self.pi_coeffs):
            out[n, : n + 1] = [float(v) for v in row]
        return out

    def sigma_float(self) -> np.ndarray:
        out = np.zeros((self.M, self.M))
        for n, row in enumerate(self.sigma_coeffs):
            out[n, : n + 1] = [float(v) for v in row]
        return out

    # -- evaluation -------------------------------------------------------
    def _rows(self, side):
        return self.pi_coeffs if side == "x" else self.sigma_coeffs

    def poly_values(self, points, nmax=None, side="x") -> np.ndarray:
        """``pi_n(x)`` (side "x") or ``sigma_n(y)`` (side "y"), shape (len, nmax)."""
        nmax = self.M if nmax is None else nmax
        ctx = make_context(EVAL_DPS)
        rows = [[ctx.mpf(c) for c in r] for r in self._rows(side)[:nmax]]
        pts = np.atleast_1d(points)
        out = np.empty((len(pts), nmax), dtype=complex if np.iscomplexobj(pts) else float)
        for i, p in enumerate(pts):
            z = ctx.mpc(p) if np.iscomplexobj(pts) else ctx.mpf(float(p))
            pw = [ctx.one]
            for _ in range(nmax):
                pw.append(pw[-1] * z)
            for n, r in enumerate(rows):
                s = ctx.fsum(c * pw[k] for k, c in enumerate(r))
                out[i, n] = complex(s) if np.iscomplexobj(pts) else float(s)
        return out

    def wave_values(self, points, nmax=None, side="x", method="mp") -> np.ndarray:
        """``psi_n(x)`` (side "x") or ``phi_n(y)`` (side "y").

        ``method="float"`` uses double-precision Horner, accurate to about
        1e-13 of the envelope maximum for moderate degrees.
        """
        nmax = self.M if nmax is None else nmax
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        V = self.model.v1 if side == "x" else self.model.v2
        if method == "float":
            C = (self.pi_float() if side == "x" else self.sigma_float())[:nmax]
            P = np.stack([np.polynomial.polynomial.polyval(pts, C[n, :n + 1])
                          for n in range(nmax)], axis=-1)
        else:
            P = self.poly_values(pts, nmax, side)
        env = np.exp(-self.model.coupling * V(pts))
        return P * env[:, None] / np.sqrt(self.h[:nmax])[None, :]

    def wave_derivative(self, points, nmax=None, side="x") -> np.ndarray:
        """Exact derivative of the wave functions."""
        nmax = self.M if nmax is None else nmax
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        V = self.model.v1 if side == "x" else self.model.v2
        ctx = make_context(EVAL_DPS)
        rows = [[ctx.mpf(c) for c in r] for r in self._rows(side)[:nmax]]
        dP = np.empty((len(pts), nmax))
        for i, p in enumerate(pts):
            z = ctx.mpf(float(p))
            for n, r in enumerate(rows):
                dP[i, n] = float(ctx.fsum(k * c * z ** (k - 1)
                                          for k, c in enumerate(r) if k))
        P = self.poly_values(pts, nmax, side)
        c = self.model.coupling
        env = np.exp(-c * V(pts))
        return (dP - c * V.deriv(pts)[:, None] * P) * env[:, None] / np.sqrt(
            self.h[:nmax])[None, :]

    def transform_values(self, points, nmax=None, side="x", method="grid") -> np.ndarray:
        """Fourier-Laplace transforms over the real contour.

        Side "x" returns ``phi~_n(x) = int phi_n(y) e^{(N/T) x y} dy``;
        side "y" returns ``psi~_n(y) = int psi_n(x) e^{(N/T) x y} dx``.

        ``method="grid"`` integrates the wave functions on a shared
        composite Gauss-Legendre grid in double precision (fast, about
        1e-12 relative); ``method="mp"`` expands the polynomial on
        extended-precision Laplace moments, one quadrature per point.
        """
        nmax = self.M if nmax is None else nmax
        if side == "x":
            V, rows = self.model.v2, self.sigma_coeffs
        else:
            V, rows = self.model.v1, self.pi_coeffs
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        if method == "grid":
            return self._transform_grid(pts, nmax, "y" if side == "x" else "x", V)
        F = _laplace_moments(V, self.model.coupling, pts, nmax - 1, EVAL_DPS)
        ctx = make_context(EVAL_DPS)
        out = np.empty((len(pts), nmax))
        for n in range(nmax):
            r = [ctx.mpf(c) for c in rows[n]]
            sq = ctx.sqrt(ctx.mpf(self.norms[n]))
            for i in range(len(pts)):
                out[i, n] = float(ctx.fsum(c * F[i][k] for k, c in enumerate(r)) / sq)
        return out

    def _transform_grid(self, pts, nmax, wave_side, V):
        c = self.model.coupling
        if pts.size == 0:
            return np.zeros((0, nmax))
        # support: where the worst-case integrand is within e^-80 of its peak
        t = np.linspace(-4 * self.model.R - 4, 4 * self.model.R + 4, 8001)
        lo, hi = np.inf, -np.inf
        for s in (pts.min(), pts.max()):
            e = -c * (V(t) - s * t) + nmax * np.log1p(np.abs(t))
            keep = t[e > e.max() - 80.0]
            lo, hi = min(lo, keep[0]), max(hi, keep[-1])
        nodes, weights = np.polynomial.legendre.leggauss(16)
        C = (self.pi_float() if wave_side == "x" else self.sigma_float())[:nmax]

        def rule(panels):
            h = (hi - lo) / panels
            mids = lo + (np.arange(panels) + 0.5) * h
            y = (mids[:, None] + 0.5 * h * nodes[None, :]).ravel()
            w = np.tile(0.5 * h * weights, panels)
            # double Horner is accurate to ~1e-14 of the envelope maximum here
            P = np.stack([np.polynomial.polynomial.polyval(y, C[n, :n + 1])
                          for n in range(nmax)], axis=1) / np.sqrt(self.h[:nmax])[None, :]
            E = np.exp(c * (np.outer(pts, y) - V(y)[None, :])) * w[None, :]
            return E @ P, E @ np.abs(P)

        panels = max(8, int(np.ceil((hi - lo) * np.sqrt(c) * 2)))
        prev, _ = rule(panels)
        for _ in range(4):
            cur, absint = rule(2 * panels)
            # convergence relative to the integral of |integrand|, the
            # floor set by cancellation in double precision
            if np.all(np.abs(cur - prev) <= 1e-12 * absint + 1e-300):
                return cur
            panels *= 2
            prev = cur
        raise QuadratureNotConverged("grid transform did not stabilize")

    def to_csv(self, path):
        """Rows ``(n, h_n, c_{n,0..n})`` for both families."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["family", "n", "h_n", "coefficients"])
            for name, rows in (("pi", self.pi_coeffs), ("sigma", self.sigma_coeffs)):
                for n, r in enumerate(rows):
                    w.writerow([name, n, repr(float(self.norms[n]))]
                               + [repr(float(c)) for c in r])


def _laplace_moments(V: Potential, coupling: float, s_values, kmax: int, dps: int):
    """``F_k(s) = int t^k exp(-c [V(t) - s t]) dt`` for ``k <= kmax``.

    The composite Gauss-Legendre rule is centred on the saddle of the
    integrand and its support adapts to the shift ``s``.
    """
    ctx = make_context(dps)
    xs, ws = _gl_nodes(dps)
    xs = [ctx.mpf(v) for v in xs]
    ws = [ctx.mpf(v) for v in ws]
    c = ctx.mpf(coupling)
    base = V.monomial()
    out = []
    for s in s_values:
        U = base.copy()
        U[1] -= s
        Uc = [ctx.mpf(float(u)) for u in U]
        lo, hi = _support(U, coupling, kmax, dps, 2.0 + abs(s))

        def rule(panels):
            acc = [ctx.zero] * (kmax + 1)
            a = ctx.mpf(lo)
            h = (ctx.mpf(hi) - a) / panels
            for p in range(panels):
                mid = a + (p + ctx.mpf(0.5)) * h
                for t, w in zip(xs, ws):
                    x = mid + t * h / 2
                    val = w * h / 2 * ctx.exp(-c * ctx.polyval(Uc[::-1], x))
                    for k in range(kmax + 1):
                        acc[k] += val
                        val *= x
            return acc

        panels = 4
        prev = rule(panels)
        while True:
            panels *= 2
            cur = rule(panels)
            scale = max(abs(v) for v in cur)
            if max(abs(a - b) for a, b in zip(cur, prev)) < scale * ctx.mpf(10) ** (-(dps - 8)):
                break
            if panels > 256:
                raise QuadratureNotConverged("transform quadrature did not stabilize")
            prev = cur
        out.append(cur)
    return out


def orthogonalize(bimoments: BimomentMatrix) -> BiorthogonalFamily:
    """Doolittle factorization of the bimoment matrix.

    Raises
    ------
    SingularMinor
        If a pivot vanishes, meaning the family does not exist at that degree.
    """
    M = bimoments.M
    ctx = make_context(bimoments.dps)
    A = [list(r) for r in bimoments.entries]
    L = [[ctx.zero] * M for _ in range(M)]
    U = [[ctx.zero] * M for _ in range(M)]
    D = [ctx.zero] * M
    tiny = ctx.mpf(10) ** (-(ctx.dps - 5))
    for k in range(M):
        # row k of (D U) and column k of L
        for j in range(k, M):
            U[k][j] = A[k][j] - ctx.fsum(L[k][s] * U[s][j] for s in range(k))
        piv = U[k][k]
        scale = abs(A[k][k]) if A[k][k] != 0 else ctx.one
        if abs(piv) <= tiny * scale:
            raise SingularMinor(f"leading minor of order {k + 1} vanishes")
        L[k][k] = ctx.one
        for i in range(k + 1, M):
            L[i][k] = (A[i][k] - ctx.fsum(L[i][s] * U[s][k] for s in range(k))) / piv
        D[k] = piv
    for k in range(M):
        for j in range(k, M):
            U[k][j] = U[k][j] / D[k]
    # invert unit-triangular factors
    Pi = _inv_unit_lower(ctx, L)
    Ut = [[U[j][i] for j in range(M)] for i in range(M)]
    Sigma = _inv_unit_lower(ctx, Ut)
    # orthogonality residual Pi I Sigma^T - D
    res = 0.0
    PI = [[ctx.fsum(Pi[n][i] * A[i][j] for i in range(n + 1)) for j in range(M)]
          for n in range(M)]
    for n in range(M):
        for m in range(M):
            v = ctx.fsum(PI[n][j] * Sigma[m][j] for j in range(m + 1))
            if n == m:
                v -= D[n]
            res = max(res, float(abs(v) / abs(D[n])))
    return BiorthogonalFamily(
        model=bimoments.model,
        pi_coeffs=tuple(tuple(Pi[n][: n + 1]) for n in range(M)),
        sigma_coeffs=tuple(tuple(Sigma[n][: n + 1]) for n in range(M)),
        norms=tuple(D), residual=res, dps=bimoments.dps, bimoments=bimoments)


def _inv_unit_lower(ctx, L):
    M = len(L)
    X = [[ctx.zero] * M for _ in range(M)]
    for i in range(M):
        X[i][i] = ctx.one
        for j in range(i):
            X[i][j] = -ctx.fsum(L[i][k] * X[k][j] for k in range(j, i))
    return X


def heine_check(family: BiorthogonalFamily, n: int, points=None) -> float:
    """Compare ``pi_n`` against the eigenvalue-integral ratio.

    Returns
    -------
    float
        Maximum relative deviation over the sample points.
    """
    if points is None:
        points = [-1.5, -0.7, 0.3, 1.1, 1.9]
    pts = np.asarray(points, dtype=float)
    ours = family.poly_values(pts, n + 1, side="x")[:, n]
    ref = heine_oracle(family.model, n, pts)
    floor = 1e-3 * np.max(np.abs(ref))
    return float(np.max(np.abs(ours - ref) / np.maximum(np.abs(ref), floor)))


def fourier_transform_wavefunction(family: BiorthogonalFamily, n: int, grid) -> np.ndarray:
    """``psi~_n(y) = int psi_n(x) e^{(N/T) x y} dx`` on ``grid``."""
    return family.transform_values(grid, n + 1, side="y")[:, n]


def parity_defect(family: BiorthogonalFamily) -> float:
    """Largest opposite-parity coefficient (zero for even potentials)."""
    worst = 0.0
    for rows in (family.pi_coeffs, family.sigma_coeffs):
        for n, r in enumerate(rows):
            for k in range(n % 2 == 0 and 1 or 0, n + 1, 2):
                worst = max(worst, abs(float(r[k])))
    return worst


@lru_cache(maxsize=32)
def _cached_family(model, M, mode):
    return orthogonalize(bimoment_matrix(model, M, mode=mode))


def build_family(model, M: int, mode: str | None = None) -> BiorthogonalFamily:
    """Bimoments plus orthogonalization, memoized per (model, M, precision)."""
    return _cached_family(validate_model(model), int(M), precision_mode(mode))
