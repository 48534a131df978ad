"""Unitary-group integrals and the finite-N mixed resolvent.

* HCIZ: ``int dU exp(tr A U B U^+)`` against ``det E / (Delta(a) Delta(b))``
  with ``E_ij = exp(a_i b_j)``, times the constant ``c_N (-pi)^{N(N-1)/2}``
  where ``c_N = prod_{k<N} k! / (-2 pi)^{N(N-1)/2}``.  The Haar measure here
  is normalized to total mass one, so the ratio of the Monte-Carlo value to
  the formula is a constant depending on N only; it is reported, not
  asserted.
* Morozov: ``<tr (x-A)^{-1} U (y-B)^{-1} U^+>`` under the weight
  ``exp(tr A U B U^+)`` equals ``1 - det(1 - (x-A)^{-1} E (y-B)^{-1} E^{-1})``.
* Mixed resolvent: ``(T/N) <tr (x-M1)^{-1} (y-M2)^{-1}>`` equals
  ``1 - det(1_N - (T/N) Pi (x-Q)^{-1} (y-P^t)^{-1} Pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NearDegenerateSpectrum, SingularShift, TruncationNotConverged
from .operators import BandOperator

__all__ = [
    "DiagonalPair",
    "haar_sample",
    "haar_batch",
    "hciz_formula",
    "hciz_constant",
    "hciz_value",
    "morozov_formula",
    "morozov_generating",
    "mixed_resolvent_finite",
]

VANDERMONDE_FLOOR = 1e-8
CHUNK = 50_000


@dataclass(frozen=True)
class DiagonalPair:
    """Two diagonal matrices ``A = diag(a)``, ``B = diag(b)``."""

    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        if len(self.a) != len(self.b):
            raise ValueError("a and b must have the same length")

    @property
    def N(self) -> int:
        return len(self.a)

    def E(self) -> np.ndarray:
        return np.exp(np.outer(self.a, self.b))

    def scaled(self, ta: float = 1.0, tb: float = 1.0) -> "DiagonalPair":
        return DiagonalPair(tuple(ta * v for v in self.a), tuple(tb * v for v in self.b))


def _vandermonde(v) -> float:
    v = np.asarray(v)
    out = 1.0
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            out *= v[j] - v[i]
    return out


def haar_batch(N: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar unitaries, shape ``(count, N, N)``.

    QR of a complex Ginibre matrix, with the phases of the diagonal of the
    triangular factor moved into Q so that the law is exactly Haar.
    """
    Z = (rng.standard_normal((count, N, N)) + 1j * rng.standard_normal((count, N, N))) / math.sqrt(2)
    Qm, Rm = np.linalg.qr(Z)
    d = np.diagonal(Rm, axis1=1, axis2=2)
    return Qm * (d / np.abs(d))[:, None, :]


def haar_sample(N: int, seed: int) -> np.ndarray:
    """A single Haar-distributed unitary, deterministic in ``seed``."""
    if N > 6:
        raise ValueError("haar_sample supports N <= 6")
    return haar_batch(N, 1, np.random.default_rng(seed))[0]


def hciz_constant(N: int) -> float:
    """``c_N (-pi)^{N(N-1)/2} = prod_{k<N} k! / 2^{N(N-1)/2}``."""
    m = N * (N - 1) // 2
    return math.prod(math.factorial(k) for k in range(1, N)) / 2.0 ** m


def hciz_formula(pair: DiagonalPair) -> float:
    """``det E / (Delta(a) Delta(b))`` times ``c_N (-pi)^{N(N-1)/2}``.

    Raises
    ------
    NearDegenerateSpectrum
        If either Vandermonde product is below 1e-8 in absolute value.
    """
    da, db = _vandermonde(pair.a), _vandermonde(pair.b)
    if abs(da) < VANDERMONDE_FLOOR or abs(db) < VANDERMONDE_FLOOR:
        raise NearDegenerateSpectrum("coincident eigenvalues: Vandermonde below 1e-8")
    return float(np.linalg.det(pair.E()) / (da * db) * hciz_constant(pair.N))


def _weights(pair: DiagonalPair, U: np.ndarray) -> tuple:
    """``|U_ij|^2`` and ``exp(tr A U B U^+) = exp(sum a_i b_j |U_ij|^2)``."""
    P = np.abs(U) ** 2
    s = np.einsum("i,kij,j->k", np.asarray(pair.a), P, np.asarray(pair.b))
    return P, s


def hciz_value(pair: DiagonalPair, samples: int = 1_000_000, seed: int = 0) -> dict:
    """Formula value, Haar Monte-Carlo estimate and their ratio.

    Returns
    -------
    dict
        ``formula`` (None when the spectrum is degenerate), ``mc_mean``,
        ``mc_err`` (one standard error), ``ratio`` and ``ratio_err``.
    """
    rng = np.random.default_rng(seed)
    N = pair.N
    tot, tot2, done = 0.0, 0.0, 0
    while done < samples:
        k = min(CHUNK, samples - done)
        _, s = _weights(pair, haar_batch(N, k, rng))
        w = np.exp(s)
        tot += w.sum()
        tot2 += (w * w).sum()
        done += k
    mean = tot / samples
    var = max(tot2 / samples - mean * mean, 0.0)
    err = math.sqrt(var / samples)
    try:
        formula = hciz_formula(pair)
    except NearDegenerateSpectrum:
        formula = None
    out = {"N": N, "a": list(pair.a), "b": list(pair.b), "samples": samples, "seed": seed,
           "formula": formula, "mc_mean": mean, "mc_err": err, "ratio": None, "ratio_err": None}
    if formula:
        out["ratio"] = mean / formula
        out["ratio_err"] = err / abs(formula)
    return out


def morozov_formula(pair: DiagonalPair, x: complex, y: complex) -> complex:
    """``1 - det(1 - (x-A)^{-1} E (y-B)^{-1} E^{-1})``.

    Raises
    ------
    SingularShift
        If ``x`` is an eigenvalue of A or ``y`` of B (within 1e-12).
    """
    a, b = np.asarray(pair.a), np.asarray(pair.b)
    if np.min(np.abs(x - a)) < 1e-12 or np.min(np.abs(y - b)) < 1e-12:
        raise SingularShift("shift coincides with an eigenvalue")
    E = pair.E()
    M = np.diag(1.0 / (x - a)) @ E @ np.diag(1.0 / (y - b)) @ np.linalg.inv(E)
    return complex(1.0 - np.linalg.det(np.eye(pair.N) - M))


def morozov_generating(pair: DiagonalPair, x: complex, y: complex,
                       samples: int = 1_000_000, seed: int = 0) -> dict:
    """Formula value and a self-normalized importance-sampling estimate.

    The estimate is ``sum_k w_k f_k / sum_k w_k`` over Haar samples, with
    ``w = exp(tr A U B U^+)`` and ``f = sum_ij |U_ij|^2 / ((x-a_i)(y-b_j))``;
    its error uses the delta method.
    """
    value = morozov_formula(pair, x, y)
    a, b = np.asarray(pair.a), np.asarray(pair.b)
    G = np.outer(1.0 / (x - a), 1.0 / (y - b))
    rng = np.random.default_rng(seed)
    sw = swf = sw2 = swf2 = sw2f = 0.0
    done = 0
    while done < samples:
        k = min(CHUNK, samples - done)
        P, s = _weights(pair, haar_batch(pair.N, k, rng))
        w = np.exp(s)
        f = np.einsum("kij,ij->k", P, G).real
        sw += w.sum()
        swf += (w * f).sum()
        sw2 += (w * w).sum()
        swf2 += (w * w * f * f).sum()
        sw2f += (w * w * f).sum()
        done += k
    mean = swf / sw
    # delta-method variance of a ratio estimator
    var = (swf2 - 2 * mean * sw2f + mean * mean * sw2) / sw ** 2
    return {"formula": value.real if abs(value.imag) < 1e-14 else value,
            "mc_mean": mean, "mc_err": math.sqrt(max(var, 0.0)),
            "samples": samples, "seed": seed}


def _mixed_det(Q: np.ndarray, P: np.ndarray, N: int, x, y, T: float) -> complex:
    K = Q.shape[0]
    I = np.eye(K)
    # Pi (x-Q)^{-1} (y-P^t)^{-1} Pi = [(x-Q)^{-1}]_{:N, :} [(y-P^t)^{-1}]_{:, :N}
    rows = np.linalg.solve((x * I - Q).T, I[:, :N]).T
    cols = np.linalg.solve(y * I - P.T, I[:, :N])
    return complex(1.0 - np.linalg.det(np.eye(N) - (T / N) * (rows @ cols)))


def mixed_resolvent_finite(Q: BandOperator, P: BandOperator, N: int, x, y,
                           T: float = 1.0, tol: float = 1e-6) -> dict:
    """``(T/N) <tr (x-M1)^{-1} (y-M2)^{-1}>`` at two truncations.

    Evaluates ``1 - det(1_N - (T/N) Pi (x-Q)^{-1} (y-P^t)^{-1} Pi)``.  The
    factor ``T/N`` inside the determinant comes from the coupling
    ``exp((N/T) tr M1 M2)`` in the Morozov formula; it reduces to the bare
    determinant at ``N = T = 1``.

    The second truncation drops ``d1 + d2`` rows; the difference is the
    convergence certificate.

    Raises
    ------
    TruncationNotConverged
        If the two values differ by more than ``tol``.
    """
    d = Q.lower + P.lower
    K = Q.size
    K2 = K - d
    if K2 < N + 3 * d:
        raise TruncationNotConverged(f"truncation {K} too small for N={N}")
    v1 = _mixed_det(Q.matrix, P.matrix, N, x, y, T)
    v2 = _mixed_det(Q.matrix[:K2, :K2], P.matrix[:K2, :K2], N, x, y, T)
    diff = abs(v1 - v2)
    if diff > tol:
        raise TruncationNotConverged(f"truncations {K} and {K2} differ by {diff:.2e}")
    val = v1.real if abs(v1.imag) < 1e-15 and np.isrealobj(x) and np.isrealobj(y) else v1
    return {"value": val, "value_small": v2, "difference": diff, "sizes": [K, K2]}
