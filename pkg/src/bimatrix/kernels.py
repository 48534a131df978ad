"""Christoffel-Darboux matrices, kernels, determinantal densities and a
Metropolis sampler of the eigenvalue measure.

Density normalization: the functions here return probability densities,
``rho_{r;s} = det[kernel block] * (N-r)! (N-s)! / (N!)^2``, so that
``rho_{1;0}(x) = K11(x, x) / N`` integrates to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .biortho import BiorthogonalFamily
from .errors import ChainNotMixed, TruncationTooSmall, UnsupportedOrder
from .model import validate_model
from .operators import BandOperator

__all__ = [
    "CDMatrix",
    "cd_matrices",
    "cd_identity_residual",
    "KernelSet",
    "kernel_set",
    "correlation_density",
    "one_point_density",
    "SamplerResult",
    "metropolis_sampler",
    "histogram_comparison",
]


@dataclass(frozen=True, eq=False)
class CDMatrix:
    """``A_n = [Q, Pi_{n-1}]`` (or ``B_n`` with P) and its nonzero block.

    Attributes
    ----------
    n : int
    full : ndarray
        The commutator on the whole truncation.
    rows, cols : tuple of int
        Index ranges ``[start, stop)`` of the declared block.
    outside : float
        Largest entry outside the declared block.
    """

    n: int
    full: np.ndarray
    rows: tuple
    cols: tuple
    outside: float

    @property
    def block(self) -> np.ndarray:
        return self.full[self.rows[0]:self.rows[1], self.cols[0]:self.cols[1]]


def _commutator_block(op: BandOperator, n: int) -> CDMatrix:
    K = op.size
    d = op.lower
    proj = np.zeros(K)
    proj[:n] = 1.0
    A = op.matrix * proj[None, :] - proj[:, None] * op.matrix
    rows = (n - 1, n + d)
    cols = (n - d, n + 1)
    mask = np.ones_like(A, dtype=bool)
    mask[rows[0]:rows[1], cols[0]:cols[1]] = False
    return CDMatrix(n=n, full=A, rows=rows, cols=cols,
                    outside=float(np.max(np.abs(A[mask]))))


def cd_matrices(Q: BandOperator, P: BandOperator, n: int):
    """Christoffel-Darboux matrices ``(A_n, B_n)``.

    Raises
    ------
    TruncationTooSmall
        Unless ``d1 + d2 < n < K - d1 - d2``.
    """
    d = Q.lower + P.lower
    if not (d < n < Q.size - d):
        raise TruncationTooSmall(f"window index n={n} outside ({d}, {Q.size - d})")
    return _commutator_block(Q, n), _commutator_block(P, n)


def cd_identity_residual(family: BiorthogonalFamily, Q: BandOperator, n: int,
                         xs, xps) -> float:
    """Generalized Christoffel-Darboux identity on a grid.

    Compares ``(x' - x) K11_n(x, x')`` with ``sum_ij (A_n)_ij psi_j(x) phi~_i(x')``
    and returns the largest deviation relative to the largest left side.
    """
    xs = np.asarray(xs, dtype=float)
    xps = np.asarray(xps, dtype=float)
    A = _commutator_block(Q, n) if n > 0 else None
    width = n + Q.lower + 1
    psi = family.wave_values(xs, width, side="x")
    pht = family.transform_values(xps, width, side="x")
    K = psi[:, :n] @ pht[:, :n].T
    lhs = (xps[None, :] - xs[:, None]) * K
    Ablk = A.full[:width, :width]
    rhs = np.einsum("ij,aj,bi->ab", Ablk, psi, pht)
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(lhs)), 1e-300))


@dataclass(frozen=True, eq=False)
class KernelSet:
    """Wave functions and transforms of the first ``n`` states at given points."""

    n: int
    coupling: float
    psi: np.ndarray        # psi_j(x_a)
    phit: np.ndarray       # phi~_j(x_a)
    phi: np.ndarray        # phi_j(y_b)
    psit: np.ndarray       # psi~_j(y_b)
    xs: np.ndarray
    ys: np.ndarray

    def K11(self):
        return self.psi @ self.phit.T

    def K12(self):
        return self.psi @ self.phi.T

    def K22(self):
        return self.psit @ self.phi.T

    def K21(self):
        """``sum psi~_j(y) phi~_j(x) - exp((N/T) x y)``, shape (len(ys), len(xs))."""
        return self.psit @ self.phit.T - np.exp(self.coupling * np.outer(self.ys, self.xs))


def kernel_set(family: BiorthogonalFamily, xs=(), ys=(), n: int | None = None) -> KernelSet:
    n = family.model.N if n is None else n
    if n > family.M:
        raise TruncationTooSmall("family shorter than the number of states")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    e = np.zeros((0, n))
    return KernelSet(
        n=n, coupling=family.model.coupling,
        psi=family.wave_values(xs, n, "x") if xs.size else e,
        phit=family.transform_values(xs, n, "x") if xs.size else e,
        phi=family.wave_values(ys, n, "y") if ys.size else e,
        psit=family.transform_values(ys, n, "y") if ys.size else e,
        xs=xs, ys=ys)


def correlation_density(family: BiorthogonalFamily, r: int, s: int, points) -> np.ndarray:
    """Probability densities ``rho_{r;s}`` from the block kernel determinant.

    Parameters
    ----------
    r, s : int
        Numbers of x and y arguments, ``0 <= r, s <= 2``, ``r + s >= 1``.
    points : sequence
        Each point is a tuple ``(x_1..x_r, y_1..y_s)`` (a bare float is
        accepted when ``r + s == 1``).

    Raises
    ------
    UnsupportedOrder
        For ``r > 2`` or ``s > 2``.
    """
    if r > 2 or s > 2 or r < 0 or s < 0 or r + s < 1:
        raise UnsupportedOrder(f"(r, s) = ({r}, {s}) not supported")
    N = family.model.N
    if r > N or s > N:
        return np.zeros(len(points))
    norm = math.factorial(N - r) * math.factorial(N - s) / math.factorial(N) ** 2
    out = []
    for p in points:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        xs, ys = p[:r], p[r:r + s]
        ks = kernel_set(family, xs, ys, N)
        top = np.hstack([ks.K11(), ks.K12()]) if s else ks.K11()
        if s:
            bottom = np.hstack([ks.K21(), ks.K22()]) if r else ks.K22()
            mat = np.vstack([top, bottom]) if r else bottom
        else:
            mat = top
        out.append(np.linalg.det(mat) * norm)
    return np.array(out)


def one_point_density(family: BiorthogonalFamily, points, side: str = "x") -> np.ndarray:
    """Vectorized ``rho_{1;0}`` (``side="x"``) or ``rho_{0;1}`` (``side="y"``)."""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    N = family.model.N
    w = family.wave_values(pts, N, side, method="float")
    t = family.transform_values(pts, N, side)
    return np.sum(w * t, axis=1) / N


# ---------------------------------------------------------------------------
# Metropolis sampler on the ordered sector
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SamplerResult:
    """Samples per chain, shapes ``(chains, n_samples, N)``."""

    x: np.ndarray
    y: np.ndarray
    acceptance: np.ndarray
    step: np.ndarray
    seed: int
    steps: int

    def diagnostics(self) -> dict:
        return {"seed": self.seed, "steps_per_chain": self.steps,
                "chains": int(self.x.shape[0]), "samples_per_chain": int(self.x.shape[1]),
                "acceptance": [round(float(a), 6) for a in self.acceptance],
                "step": [round(float(s), 6) for s in self.step]}


def _log_density(model, X, Y):
    c = model.coupling
    N = X.shape[1]
    ld = -c * np.sum(model.v1(X) + model.v2(Y), axis=1)
    for i in range(N):
        for j in range(i + 1, N):
            dx = X[:, j] - X[:, i]
            dy = Y[:, j] - Y[:, i]
            ok = (dx > 0) & (dy > 0)
            ld = np.where(ok, ld + np.log(np.where(ok, dx * dy, 1.0)), -np.inf)
    if N > 1:
        E = c * X[:, :, None] * Y[:, None, :]
        shift = np.max(E, axis=2, keepdims=True)
        sign, logdet = np.linalg.slogdet(np.exp(E - shift))
        ld = np.where(sign > 0, ld + logdet + shift.sum(axis=(1, 2)), -np.inf)
    else:
        ld = ld + c * X[:, 0] * Y[:, 0]
    return ld


def metropolis_sampler(model, steps: int, seed: int, chains: int = 16,
                       burn_in: int | None = None, thin: int | None = None,
                       target: float = 0.35) -> SamplerResult:
    """Sample ordered eigenvalue configurations of the two-matrix model.

    Each chain performs ``steps`` single-coordinate Gaussian moves after a
    burn-in during which its step size is tuned toward ``target``
    acceptance.  Chains use independent streams spawned from ``seed``, so
    the output is a deterministic function of the arguments.

    Raises
    ------
    ChainNotMixed
        If a chain's acceptance rate is outside ``[0.1, 0.7]``.
    """
    model = validate_model(model)
    N = model.N
    if N > 8:
        raise ValueError("sampler supports N <= 8")
    burn_in = steps // 5 if burn_in is None else burn_in
    thin = 2 * N if thin is None else thin
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(chains)]

    # start from a spread-out ordered configuration near the centre
    scale = 1.0 / math.sqrt(model.coupling)
    base = np.linspace(-1.0, 1.0, N) * scale * math.sqrt(N)
    X = np.tile(base + model.center[0], (chains, 1))
    Y = np.tile(base + model.center[1], (chains, 1))
    ld = _log_density(model, X, Y)
    step = np.full(chains, 0.5 * scale)
    block = 4096

    def draws(count):
        coord = np.stack([s.integers(0, 2 * N, size=count) for s in streams], axis=1)
        noise = np.stack([s.standard_normal(size=count) for s in streams], axis=1)
        unif = np.stack([s.random(size=count) for s in streams], axis=1)
        return coord, noise, unif

    rows = np.arange(chains)
    xs_out, ys_out = [], []
    accepted = np.zeros(chains)
    total = burn_in + steps
    t = 0
    while t < total:
        count = min(block, total - t)
        coord, noise, unif = draws(count)
        for k in range(count):
            ci = coord[k]
            is_x = ci < N
            idx = np.where(is_x, ci, ci - N)
            Xn = X.copy()
            Yn = Y.copy()
            prop = step * noise[k]
            Xn[rows[is_x], idx[is_x]] += prop[is_x]
            Yn[rows[~is_x], idx[~is_x]] += prop[~is_x]
            ldn = _log_density(model, Xn, Yn)
            acc = np.log(unif[k]) < ldn - ld
            X = np.where(acc[:, None], Xn, X)
            Y = np.where(acc[:, None], Yn, Y)
            ld = np.where(acc, ldn, ld)
            if t < burn_in:
                # Robbins-Monro adaptation of the log step size
                step *= np.exp((acc - target) / math.sqrt(t + 10.0))
            else:
                accepted += acc
                if (t - burn_in) % thin == thin - 1:
                    xs_out.append(X.copy())
                    ys_out.append(Y.copy())
            t += 1
    rate = accepted / max(steps, 1)
    if np.any(rate < 0.1) or np.any(rate > 0.7):
        raise ChainNotMixed(f"acceptance rates {rate.round(3).tolist()} outside [0.1, 0.7]")
    return SamplerResult(x=np.stack(xs_out, axis=1), y=np.stack(ys_out, axis=1),
                         acceptance=rate, step=step, seed=seed, steps=steps)


def histogram_comparison(samples: np.ndarray, density, edges, gl_nodes: int = 8) -> dict:
    """Compare per-chain histograms with a density integrated over bins.

    Parameters
    ----------
    samples : ndarray, shape (chains, n, N)
    density : callable
        Vectorized probability density of a single eigenvalue.
    edges : ndarray
        Bin edges.
    gl_nodes : int
        Gauss-Legendre nodes per bin for the exact bin masses.

    Returns
    -------
    dict
        Bin centres, exact bin masses, chain-averaged masses, their
        standard errors and the largest deviation in units of sigma.
    """
    edges = np.asarray(edges, dtype=float)
    chains = samples.shape[0]
    per_chain = np.array([np.histogram(samples[c].ravel(), bins=edges)[0]
                          / samples[c].size for c in range(chains)])
    mean = per_chain.mean(axis=0)
    err = per_chain.std(axis=0, ddof=1) / math.sqrt(chains)
    t, w = np.polynomial.legendre.leggauss(gl_nodes)
    a, b = edges[:-1, None], edges[1:, None]
    pts = 0.5 * (b - a) * t[None, :] + 0.5 * (a + b)
    vals = np.asarray(density(pts.ravel())).reshape(pts.shape)
    exact = 0.5 * (b[:, 0] - a[:, 0]) * (vals @ w)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(err > 0, np.abs(mean - exact) / err, 0.0)
    return {"centers": 0.5 * (edges[1:] + edges[:-1]), "exact": exact, "mc": mean,
            "sigma": err, "max_z": float(np.max(z))}
