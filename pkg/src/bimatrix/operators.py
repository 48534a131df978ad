"""Multiplication operators Q and P in the wave-function basis.

``x psi_n = sum_m Q_nm psi_m`` and ``y phi_n = sum_m P_nm phi_m``.  Both are
obtained by exact polynomial algebra in extended precision: multiply the
coefficient row of ``pi_n`` by ``x``, re-expand on the monic basis with the
inverse coefficient table, then rescale by ``sqrt(h_m / h_n)``.

A family of size ``M`` determines ``x pi_n`` for ``n <= M-2``, so operators
are returned as square matrices of size ``K = M-1``.  The last few rows of
any product of truncated operators are corrupted by the missing entry
``Q[K-1, K]``; every check below is restricted to an interior window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .biortho import BiorthogonalFamily
from .errors import TruncationTooSmall
from .precision import make_context

__all__ = [
    "BandOperator",
    "build_Q_P",
    "band_leakage",
    "string_equation_residual",
    "heisenberg_residual",
    "trace_moments",
    "connected_trace_moment",
]


@dataclass(frozen=True, eq=False)
class BandOperator:
    """Truncated banded operator.

    Attributes
    ----------
    matrix : ndarray, shape (K, K)
    lower : int
        Declared lower bandwidth ``d`` (entries with ``m < n - d`` vanish).
    gamma : ndarray
        Superdiagonal, ``gamma_n = sqrt(h_{n+1}/h_n)``.
    name : str
    lead : float
        Leading coefficient of the potential that sets the bandwidth
        (``g~_{d2+1}`` for Q, ``g_{d1+1}`` for P).
    """

    matrix: np.ndarray
    lower: int
    gamma: np.ndarray
    name: str
    lead: float = 1.0

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def alpha(self, k: int, n: int) -> float:
        """Coefficient ``alpha_k(n) = matrix[n, n-k]`` (``k = -1`` gives gamma_n)."""
        return float(self.matrix[n, n - k])

    def to_csv(self, path):
        """Banded entries as ``(n, m, value)`` triplets."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "m", "value"])
            K = self.size
            for n in range(K):
                for m in range(max(0, n - self.lower), min(K, n + 2)):
                    w.writerow([n, m, repr(float(self.matrix[n, m]))])


def _operator(ctx, rows, norms, K):
    """Matrix of multiplication by the variable in the scaled basis."""
    M = len(rows)
    # L = Pi^{-1}: monomial x^k = sum_m L[k][m] pi_m
    Pi = [[ctx.zero] * M for _ in range(M)]
    for n, r in enumerate(rows):
        for k, c in enumerate(r):
            Pi[n][k] = ctx.mpf(c)
    L = [[ctx.zero] * M for _ in range(M)]
    for i in range(M):
        L[i][i] = ctx.one
        for j in range(i):
            L[i][j] = -ctx.fsum(Pi[i][k] * L[k][j] for k in range(j, i))
    out = np.zeros((K, K))
    sq = [ctx.sqrt(ctx.mpf(h)) for h in norms]
    for n in range(K):
        # x * pi_n has monomial coefficients Pi[n][k-1] at x^k
        for m in range(min(n + 2, M)):
            c = ctx.fsum(Pi[n][k - 1] * L[k][m] for k in range(max(m, 1), n + 2))
            if m < K:
                out[n, m] = float(c * sq[m] / sq[n])
    return out


def build_Q_P(family: BiorthogonalFamily, min_size: int | None = None):
    """Return ``(Q, P)`` as :class:`BandOperator` objects of size ``M-1``.

    Raises
    ------
    TruncationTooSmall
        If the family is shorter than ``d1 + d2 + 4`` (or ``min_size``).
    """
    model = family.model
    need = max(model.d1 + model.d2 + 4, min_size or 0)
    if family.max_degree < need:
        raise TruncationTooSmall(
            f"family of max degree {family.max_degree} < required {need}")
    ctx = make_context(family.dps)
    K = family.M - 1
    Qm = _operator(ctx, family.pi_coeffs, family.norms, K)
    Pm = _operator(ctx, family.sigma_coeffs, family.norms, K)
    g = family.gamma[:K]
    return (BandOperator(Qm, model.d2, g, "Q", model.v2.leading),
            BandOperator(Pm, model.d1, g, "P", model.v1.leading))


def interior(op: BandOperator, margin: int) -> range:
    """Rows kept away from both ends of the truncation."""
    return range(margin, op.size - margin)


def band_leakage(op: BandOperator, margin: int | None = None) -> float:
    """Out-of-band mass relative to in-band mass on interior rows."""
    A = op.matrix
    K = op.size
    margin = op.lower + 1 if margin is None else margin
    out_mass = 0.0
    in_mass = 0.0
    for n in range(K - margin):
        for m in range(K):
            if n - op.lower <= m <= n + 1:
                in_mass = max(in_mass, abs(A[n, m]))
            else:
                out_mass = max(out_mass, abs(A[n, m]))
    return out_mass / in_mass


def _string_part(A, B, Vd, T, N, rows):
    """Check ``A^t`` against ``V'(B)`` with the lower-diagonal correction."""
    VB = Vd.deriv_of_matrix(B.matrix)
    At = A.matrix.T
    g = B.gamma
    K = B.size
    dev = 0.0
    scale = max(1.0, float(np.max(np.abs(VB[: rows.stop, : rows.stop]))))
    for n in rows:
        for m in range(n, K):
            dev = max(dev, abs(At[n, m] - VB[n, m]))
        if n >= 1:
            corr = T * n / (N * g[n - 1])
            dev = max(dev, abs(At[n, n - 1] - (VB[n, n - 1] - corr)))
    return dev / scale


def string_equation_residual(Q: BandOperator, P: BandOperator, model) -> dict:
    """Residuals of the equations of motion on interior rows.

    Returns
    -------
    dict
        ``{"x_side", "y_side", "max", "window"}``; the x side compares
        ``P^t`` with ``V1'(Q)`` and the y side ``Q^t`` with ``V2'(P)``.
    """
    d1, d2 = model.d1, model.d2
    K = Q.size
    hi = K - 1 - d1 * d2 - max(d1, d2)
    if hi <= d1 + d2:
        raise TruncationTooSmall("no interior rows left for the string equation")
    rows = range(d1 + d2, hi)
    x_side = _string_part(P, Q, model.v1, model.T, model.N, rows)
    y_side = _string_part(Q, P, model.v2, model.T, model.N, rows)
    return {"x_side": x_side, "y_side": y_side, "max": max(x_side, y_side),
            "window": [rows.start, rows.stop]}


def heisenberg_residual(Q: BandOperator, P: BandOperator, model) -> dict:
    """``max |[P^t, Q] - (T/N) Id|`` over the interior block."""
    d = model.d1 + model.d2
    K = Q.size
    lo, hi = d, K - d
    if hi <= lo:
        raise TruncationTooSmall("no interior window for the Heisenberg check")
    Pt = P.matrix.T
    C = Pt @ Q.matrix - Q.matrix @ Pt
    block = C[lo:hi, lo:hi] - (model.T / model.N) * np.eye(hi - lo)
    return {"max": float(np.max(np.abs(block))), "window": [lo, hi],
            "diagonal": np.diag(C)[lo:hi].tolist()}


def trace_moments(Q: BandOperator, N: int, kmax: int) -> np.ndarray:
    """``<tr M1^k> = sum_{n<N} (Q^k)_nn`` for ``k = 0..kmax``."""
    if N + (kmax + 1) // 2 + 1 > Q.size:
        raise TruncationTooSmall("truncation too small for the requested moments")
    out = np.empty(kmax + 1)
    Pk = np.eye(Q.size)
    for k in range(kmax + 1):
        out[k] = np.trace(Pk[:N, :N])
        Pk = Pk @ Q.matrix
    return out


def connected_trace_moment(Q: BandOperator, N: int) -> float:
    """``<tr M1^2 tr M1^2>_c = tr(Pi Q^4 Pi) - tr((Pi Q^2 Pi)^2)``."""
    if N + 3 > Q.size:
        raise TruncationTooSmall("truncation too small for the connected moment")
    Q2 = Q.matrix @ Q.matrix
    Q4 = Q2 @ Q2
    B = Q2[:N, :N]
    return float(np.trace(Q4[:N, :N]) - np.trace(B @ B))
