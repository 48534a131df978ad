"""Large-N asymptotics of the wave functions on a genus-zero curve.

At genus zero every theta-function ratio in the asymptotic ansatz equals
one and the uniformizing coordinate ``z`` of :mod:`bimatrix.loop` plays the
role of ``Lambda(p)``.  With ``T = 1`` and ``x`` outside the cut,

    psi_{N-k}(x) ~ sqrt(H(z) / h~_k) (gamma z)^{-k} exp(-N T(z)),

where ``z`` is the physical preimage of ``x``, ``H = gamma / x'(z)`` (so
``H -> 1`` at ``inf_x``), and

    T(z) = V1(x(z)) - ln x(z) + int_{inf_x}^{z} (y - V1'(x) + 1/x) dx

is the effective exponent.  The norms are predicted by
``h~_k = 2 pi sqrt(2 pi gamma gamma~ / N) (gamma gamma~)^{-k} exp(-N mu)``
with ``mu = T(z) + T~(z) - x(z) y(z)`` independent of ``z``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .biortho import build_family
from .errors import ConfigInvalid, InsideCutRegion, PathCrossesCut
from .laurent import Laurent
from .loop import (RationalSpectralCurve, _primitive_parts, cut_endpoints,
                   free_energy_derivatives, solve_genus0_curve)
from .model import validate_model

__all__ = [
    "AsymptoticData",
    "asymptotic_data",
    "effective_exponent",
    "effective_exponent_path",
    "asymptotic_psi",
    "asymptotic_error_sweep",
    "fit_exponent",
    "write_error_table",
]

EDGE_MARGIN = 0.25


@dataclass(frozen=True, eq=False)
class AsymptoticData:
    """Genus-zero data entering the asymptotic formula.

    Attributes
    ----------
    curve : RationalSpectralCurve
    gamma, gamma_t : float
        ``lim x / Lambda`` at ``inf_x`` and ``lim y Lambda`` at ``inf_y``, with ``Lambda = z``.
    mu : float
    mu_spread : float
        Largest deviation of ``T + T~ - x y`` from ``mu`` at the probe points.
    P1, P2 : Laurent
        Laurent parts of the regularized integrals from ``inf_x`` and ``inf_y``.
    """

    curve: RationalSpectralCurve
    gamma: float
    gamma_t: float
    mu: float
    mu_spread: float
    P1: Laurent
    P2: Laurent

    def H(self, z):
        """``gamma dz/dx``; tends to 1 at ``inf_x``."""
        return self.gamma / self.curve.dx(z)

    def H_tilde(self, z):
        """``gamma~ d(1/z)/dy``; tends to 1 at ``inf_y``."""
        z = np.asarray(z, dtype=complex)
        return -self.gamma_t / (z * z * self.curve.dy(z))

    def h_tilde(self, k: int, N: int) -> float:
        """Predicted norm ``h_{N-k}``."""
        gg = self.gamma * self.gamma_t
        return 2 * math.pi * math.sqrt(2 * math.pi * gg / N) * gg ** (-k) * math.exp(-N * self.mu)


def asymptotic_data(curve_or_model) -> AsymptoticData:
    """Assemble :class:`AsymptoticData` (requires ``T = 1``).

    Raises
    ------
    ConfigInvalid
        If the model temperature differs from one.
    """
    curve = curve_or_model if isinstance(curve_or_model, RationalSpectralCurve) \
        else solve_genus0_curve(curve_or_model)
    if abs(curve.T - 1.0) > 1e-14:
        raise ConfigInvalid("the asymptotic formula is implemented for T = 1 only")
    P1, P2, _, _ = _primitive_parts(curve)
    probes = (1.7, 2.3 + 0.4j, -1.9 + 1.1j)
    fd = free_energy_derivatives(curve, probes)
    mu = fd["dF_dT"]
    spread = max(abs(v - mu) for v in fd["dF_dT_probes"])
    return AsymptoticData(curve=curve, gamma=curve.gamma, gamma_t=curve.gamma_t, mu=mu,
                          mu_spread=float(spread), P1=P1, P2=P2)


def effective_exponent(data: AsymptoticData, z, side: str = "x"):
    """``T(z)`` (side "x") or ``T~(z)`` (side "y") from the exact Laurent primitive."""
    c = data.curve
    m = c.model
    z = np.asarray(z, dtype=complex)
    if side == "x":
        return m.v1(c.x(z)) + data.P1(z) - m.T * np.log(data.gamma * z)
    return m.v2(c.y(z)) + data.P2(z) - m.T * np.log(data.gamma_t / z)


def effective_exponent_path(data: AsymptoticData, z, s_max: float = 1e3, panels: int = 48,
                            min_dx: float = 1e-3) -> complex:
    """``T(z)`` by quadrature of ``y dx`` along the ray ``z s``, ``s in [1, s_max]``.

    The far end is matched to ``V1(x) - ln x`` plus the Laurent tail of the
    regularized integral, which is ``O(1/s_max)`` there.

    Raises
    ------
    PathCrossesCut
        If the path comes close to a zero of ``x'`` (the cut).
    """
    c = data.curve
    m = c.model
    z = complex(z)
    nodes, weights = np.polynomial.legendre.leggauss(16)
    # logarithmic panels in s
    edges = np.geomspace(1.0, s_max, panels + 1)
    total = 0.0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        s = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        zz = z * s
        dx = c.dx(zz)
        if np.min(np.abs(dx)) < min_dx * abs(c.gamma):
            raise PathCrossesCut(f"path from z={z} passes near a branch point")
        total += 0.5 * (hi - lo) * np.sum(weights * c.y(zz) * dx * z)
    zL = z * s_max
    tail = m.v1(c.x(zL)) + data.P1(zL) - m.T * np.log(data.gamma * zL)
    return complex(tail - total)


def _physical_z(curve, x, margin):
    lo, hi = cut_endpoints(curve)
    if lo - margin <= x <= hi + margin:
        raise InsideCutRegion(f"x={x} within {margin} of the cut [{lo:.4f}, {hi:.4f}]")
    return curve.x_preimages(x)[0]


def asymptotic_psi(data: AsymptoticData, N: int, k: int, x, margin: float = EDGE_MARGIN) -> dict:
    """Predicted ``psi_{N-k}(x)`` and ``h_{N-k}`` for real ``x`` off the cut.

    Raises
    ------
    InsideCutRegion
        If ``x`` is within ``margin`` of the cut (two-saddle region).
    """
    x = float(x)
    z = _physical_z(data.curve, x, margin)
    hk = data.h_tilde(k, N)
    Texp = effective_exponent(data, z)
    val = np.sqrt(data.H(z) / hk) * (data.gamma * z) ** (-k) * np.exp(-N * Texp)
    return {"x": x, "z": complex(z), "psi": float(np.real(val)), "imag": float(np.imag(val)),
            "h": hk}


def fit_exponent(Ns, errors) -> float:
    """Least-squares exponent ``p`` in ``error ~ C N^-p``."""
    return float(-np.polyfit(np.log(np.asarray(Ns, float)), np.log(np.asarray(errors, float)), 1)[0])


def asymptotic_error_sweep(model, Ns, xs, ks=(0,), extra: int = 4, mode: str = "extended") -> dict:
    """Relative error of the asymptotic formula against the finite-N wave functions.

    Parameters
    ----------
    model : ModelSpec or ValidatedModel
        Its ``N`` is replaced by each entry of ``Ns``.
    Ns, xs, ks : sequences
        Matrix sizes, real evaluation points and offsets ``k``.

    Returns
    -------
    dict
        ``rows`` (N, k, x, psi_exact, psi_asym, rel_err, h_exact, h_asym)
        sorted by ``(N, k, x)`` and ``exponent[(k, x)]``, the fitted decay
        exponent of the error in ``N``.
    """
    base = validate_model(model)
    if not len(Ns):
        raise ConfigInvalid("empty N ladder")
    data = asymptotic_data(base.with_N(1))
    rows = []
    for N in sorted(Ns):
        fam = build_family(base.with_N(N), N + extra, mode)
        psi = fam.wave_values(np.asarray(xs, float), N + 1)
        for k in sorted(ks):
            for i, x in enumerate(sorted(xs)):
                j = list(np.asarray(xs, float)).index(x)
                pred = asymptotic_psi(data, N, k, x)
                exact = float(psi[j, N - k])
                rows.append({"N": N, "k": k, "x": float(x), "psi_exact": exact,
                             "psi_asym": pred["psi"],
                             "rel_err": abs(pred["psi"] - exact) / abs(exact),
                             "h_exact": float(fam.h[N - k]), "h_asym": pred["h"]})
    expo = {}
    for k in ks:
        for x in xs:
            sel = [r for r in rows if r["k"] == k and r["x"] == float(x)]
            expo[(k, float(x))] = fit_exponent([r["N"] for r in sel], [r["rel_err"] for r in sel])
    return {"rows": rows, "exponent": expo, "mu": data.mu, "mu_spread": data.mu_spread}


def write_error_table(rows, path):
    """CSV with columns ``N, k, x, psi_exact, psi_asym, rel_err``."""
    cols = ["N", "k", "x", "psi_exact", "psi_asym", "rel_err"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in rows:
            w.writerow([r["N"], r["k"], repr(r["x"])] + [repr(r[c]) for c in cols[3:]])
