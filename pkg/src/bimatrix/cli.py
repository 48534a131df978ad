"""Command-line front end.

``bimatrix <subcommand> --config path [--out dir]`` reads a JSON scenario,
runs one family of checks and writes ``report.json`` plus CSV tables and
whitespace-separated plot data into the output directory.  Every random
quantity is driven by explicit seeds in the config and no timestamps are
written, so identical configs give byte-identical outputs.

The exit code is 0 when every checked invariant passes, 1 when one fails,
2 for an invalid config and 3 for any other library error; in the last two
cases the report carries the machine-readable error code.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import loop
from .biortho import build_family, heine_check
from .diffsys import (build_system, curve_agreement, duality_residual,
                      spectral_curve_finite_n, trace_identity_residual)
from .errors import BimatrixError, ConfigInvalid, NewtonDiverged
from .group_integrals import (DiagonalPair, hciz_value, mixed_resolvent_finite,
                              morozov_generating)
from .kernels import (cd_identity_residual, correlation_density, histogram_comparison,
                      metropolis_sampler, one_point_density)
from .model import gaussian_model, model_from_dict, quartic_model
from .operators import (band_leakage, build_Q_P, heisenberg_residual,
                        string_equation_residual, trace_moments)
from .precision import precision_mode
from .quadrature import direct_density_oracle, mixed_resolvent_oracle_n1

__all__ = ["COMMANDS", "load_config", "run_scenario", "emit_plot_data", "main"]


# ---------------------------------------------------------------------------
# Config and output helpers
# ---------------------------------------------------------------------------

def _model(cfg: dict):
    m = cfg.get("model")
    if m is None:
        raise ConfigInvalid("config needs a 'model' entry")
    if isinstance(m, str):
        m = {"preset": m}
    preset = m.get("preset")
    N = int(m.get("N", 1))
    if preset == "G0":
        return gaussian_model(N, T=float(m.get("T", 1.0)))
    if preset == "quartic":
        return quartic_model(float(m["t"]), N, float(m.get("T", 1.0)))
    if preset is not None:
        raise ConfigInvalid(f"unknown model preset {preset!r}")
    return model_from_dict(m)


def load_config(path) -> dict:
    """Read a scenario config; tolerances must be positive."""
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigInvalid("config must be a JSON object")
    for k, v in cfg.get("tolerances", {}).items():
        if not (isinstance(v, (int, float)) and v > 0):
            raise ConfigInvalid(f"tolerance {k!r} must be positive")
    return cfg


def _ladder(cfg: dict, default) -> list:
    Ns = cfg.get("N_ladder", default)
    if not isinstance(Ns, list) or not Ns:
        raise ConfigInvalid("N_ladder must be a non-empty list")
    if any(int(n) != n or n < 1 for n in Ns):
        raise ConfigInvalid("N_ladder entries must be positive integers")
    return sorted(int(n) for n in Ns)


def _seed(cfg: dict) -> int:
    if "seed" not in cfg:
        raise ConfigInvalid("this scenario needs an explicit 'seed'")
    return int(cfg["seed"])


class _Report:
    def __init__(self, cfg):
        self.cfg = cfg
        self.tols = cfg.get("tolerances", {})
        self.summary = {}
        self.invariants = {}
        self.tables = {}
        self.plots = {}

    def check(self, name, value, default_tol, kind="max"):
        """Record ``value < tol`` (``kind="max"``) or ``value > tol`` (``"min"``)."""
        tol = float(self.tols.get(name, default_tol))
        value = float(value)
        ok = value < tol if kind == "max" else value > tol
        self.invariants[name] = {"value": value, "tol": tol, "kind": kind,
                                 "pass": bool(ok and math.isfinite(value))}

    def check_range(self, name, value, lo, hi):
        value = float(value)
        self.invariants[name] = {"value": value, "range": [lo, hi],
                                 "pass": bool(lo <= value <= hi)}

    def table(self, name, columns, rows):
        self.tables[name] = (columns, rows)

    def plot(self, name, columns, rows):
        self.plots[name] = {"columns": columns, "rows": rows}


def _num(v):
    if isinstance(v, complex) or isinstance(v, np.complexfloating):
        return [float(v.real), float(v.imag)]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_num(u) for u in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _num(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(u) for u in v]
    return v


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_orthogonalize(cfg, rep):
    model = _model(cfg)
    M = int(cfg.get("M", 12))
    fam = build_family(model, M)
    rep.summary.update(M=M, norms=[float(h) for h in fam.h], gamma=fam.gamma.tolist())
    rep.check("orthogonality", fam.residual, 1e-8)
    if cfg.get("heine", model.N <= 2):
        pts = cfg.get("heine_points", [-1.0, -0.4, 0.1, 0.6, 1.3])
        for n in (1, 2):
            rep.check(f"heine_n{n}", heine_check(fam, n, pts), 1e-6)
    C = fam.pi_float()
    rep.table("pi_coefficients", ["n"] + [f"c{k}" for k in range(M)],
              [[n] + list(C[n]) for n in range(M)])


def cmd_operators(cfg, rep):
    model = _model(cfg)
    M = int(cfg.get("M", 24))
    Q, P = build_Q_P(build_family(model, M))
    rep.check("band_leakage_Q", band_leakage(Q), 1e-8)
    rep.check("band_leakage_P", band_leakage(P), 1e-8)
    rep.check("string_equation", string_equation_residual(Q, P, model)["max"], 1e-8)
    rep.check("heisenberg", heisenberg_residual(Q, P, model)["max"], 1e-8)
    for op in (Q, P):
        rows = [[n, m, op.matrix[n, m]] for n in range(op.size)
                for m in range(max(0, n - op.lower), min(op.size, n + 2))]
        rep.table(f"operator_{op.name}", ["n", "m", "value"], rows)


def cmd_kernels(cfg, rep):
    model = _model(cfg)
    N = model.N
    M = int(cfg.get("M", max(24, N + 16)))
    fam = build_family(model, M)
    Q, _ = build_Q_P(fam)
    n = int(cfg.get("n", max(N, Q.lower + 1)))
    L = float(cfg.get("grid_radius", 1.5))
    grid = np.linspace(-L, L, int(cfg.get("grid_points", 20)))
    rep.check("cd_identity", cd_identity_residual(fam, Q, n, grid, grid), 1e-6)
    if N <= 2:
        pts = [-1.1, -0.3, 0.2, 0.9]
        dev = 0.0
        for r, s, p in [(1, 0, pts), (0, 1, pts), (1, 1, [(a, b) for a, b in zip(pts, pts[::-1])])]:
            k = correlation_density(fam, r, s, p)
            o = direct_density_oracle(model, r, s, p)
            dev = max(dev, float(np.max(np.abs(k - o))))
            rep.summary[f"density_{r}{s}"] = k.tolist()
        rep.check("kernel_vs_bruteforce", dev, 1e-6)


def _large_n_density(model, xs):
    try:
        curve = loop.solve_genus0_curve(model.with_N(1))
    except NewtonDiverged:
        return np.full(len(xs), np.nan)
    lo, hi = loop.cut_endpoints(curve)
    out = np.zeros(len(xs))
    inside = (xs > lo) & (xs < hi)
    if np.any(inside):
        out[inside] = loop.equilibrium_density(curve, xs[inside])
    return out


def cmd_densities(cfg, rep):
    model = _model(cfg)
    N = model.N
    seed = _seed(cfg)
    total = int(cfg.get("steps", 1_000_000))
    chains = int(cfg.get("chains", 16))
    res = metropolis_sampler(model, total // chains, seed, chains=chains)
    fam = build_family(model, int(cfg.get("M", N + 16)))
    L = float(cfg.get("range", 2.5))
    edges = np.linspace(-L, L, int(cfg.get("bins", 20)) + 1)
    rep.summary["sampler"] = res.diagnostics()
    width = edges[1] - edges[0]
    for side, samples in (("x", res.x), ("y", res.y)):
        cmp_ = histogram_comparison(samples, lambda p: one_point_density(fam, p, side), edges)
        rep.check(f"histogram_{side}_max_z", cmp_["max_z"], 3.0)
        if side == "x":
            c = cmp_["centers"]
            kern = one_point_density(fam, c, "x")
            large = _large_n_density(model, c)
            rows = [[x, k, m / width, g] for x, k, m, g in zip(c, kern, cmp_["mc"], large)]
            rep.plot("density_overlay", ["x", "kernel", "mc", "large_N"], rows)
            rep.table("histogram_x", ["x", "exact_mass", "mc_mass", "sigma"],
                      [list(r) for r in zip(c, cmp_["exact"], cmp_["mc"], cmp_["sigma"])])


def _systems(model, M, n):
    Q, P = build_Q_P(build_family(model, M))
    D1 = build_system(Q, P, model, n, "D1")
    D1t = build_system(Q, P, model, n, "D1~")
    D2 = build_system(Q, P, model, n, "D2")
    D2t = build_system(Q, P, model, n, "D2~")
    return Q, P, D1, D1t, D2, D2t


def cmd_diffsys(cfg, rep):
    model = _model(cfg)
    M = int(cfg.get("M", 24))
    n = int(cfg.get("n", 6))
    Q, P, D1, D1t, D2, D2t = _systems(model, M, n)
    rep.check("D1_constructions", D1.discrepancy, 1e-6)
    rep.check("D2_constructions", D2.discrepancy, 1e-6)
    rep.check("duality_D1", duality_residual(D1, D1t, Q, P), 1e-6)
    rep.check("duality_D2", duality_residual(D2, D2t, Q, P), 1e-6)
    rep.check("trace_D1~", trace_identity_residual(D1t, model), 1e-8)
    rep.check("trace_D2~", trace_identity_residual(D2t, model), 1e-8)
    curves = [spectral_curve_finite_n(D, model) for D in (D1, D1t, D2, D2t)]
    rep.check("curve_agreement", curve_agreement(curves), 1e-6)
    c = curves[0].coeffs
    rep.table("curve_En", ["i", "j", "coeff"],
              [[i, j, c[i, j]] for i in range(c.shape[0]) for j in range(c.shape[1])])
    rep.summary["E_n_monic"] = curves[0].monic().tolist()


def cmd_curve(cfg, rep):
    """Finite-N curves ``E_N`` along an N ladder against the large-N ``E^(0)``."""
    model = _model(cfg)
    Ns = _ladder(cfg, [4, 8, 12])
    curve = loop.solve_genus0_curve(model.with_N(1))
    E0 = loop.spectral_curve_E0(curve).monic()
    rep.check("curve_equations", loop.residue_conditions(curve)["max"], 1e-10)
    rows, devs = [], []
    for N in Ns:
        mN = model.with_N(N)
        Q, P = build_Q_P(build_family(mN, N + 16))
        D1 = build_system(Q, P, mN, N, "D1")
        EN = spectral_curve_finite_n(D1, mN).monic()
        # E_N and E^(0) differ by an overall sign convention; both are monic here
        devs.append(float(np.max(np.abs(EN - E0))))
        rows.append([N] + list(EN.ravel()))
    shape = E0.shape
    cols = ["N"] + [f"e{i}{j}" for i in range(shape[0]) for j in range(shape[1])]
    rows.append(["inf"] + list(E0.ravel()))
    rep.plot("curve_coefficients", cols, rows)
    rep.summary.update(curve=curve.to_dict(), E0_monic=E0.tolist(), deviation=devs)
    if len(Ns) >= 2 and min(devs) > 0:
        rep.summary["deviation_exponent"] = asy.fit_exponent(Ns, devs)
    rep.check("curve_vs_large_N", devs[-1], 0.05)


def cmd_mixed(cfg, rep):
    model = _model(cfg)
    Ns = _ladder(cfg, [4, 8, 16])
    pts = cfg.get("points", [[3.0, 0.5, 2.5, -0.3], [4.0, 0.0, 4.0, 0.0]])
    pts = [(complex(p[0], p[1]), complex(p[2], p[3])) for p in pts]
    rows = []
    if 1 in Ns:
        # at N = 1 the truncations converge only well away from the real axis
        opts = cfg.get("oracle_points", [[3.0, 2.0, 3.0, -2.0], [1.0, 2.0, 2.0, 2.0],
                                         [0.5, 3.0, -1.0, 2.5], [-2.0, 2.5, 1.5, -2.0],
                                         [2.5, -2.0, -2.0, 2.0]])
        m1 = model.with_N(1)
        Q, P = build_Q_P(build_family(m1, int(cfg.get("M_oracle", 40))))
        dev = 0.0
        for x, y in [(complex(p[0], p[1]), complex(p[2], p[3])) for p in opts]:
            v = mixed_resolvent_finite(Q, P, 1, x, y, m1.T)["value"]
            o = mixed_resolvent_oracle_n1(m1, x, y)
            dev = max(dev, abs(v - o))
        rep.check("mixed_vs_oracle_N1", dev, 1e-5)
    curve = loop.solve_genus0_curve(model.with_N(1))
    E0 = loop.spectral_curve_E0(curve)
    large = [loop.mixed_resolvent_large_n(curve, x, y, E0) for x, y in pts]
    ladder = [N for N in Ns if N > 1]
    devs = {i: [] for i in range(len(pts))}
    for N in ladder:
        mN = model.with_N(N)
        Q, P = build_Q_P(build_family(mN, N + 24))
        for i, (x, y) in enumerate(pts):
            v = complex(mixed_resolvent_finite(Q, P, N, x, y, mN.T)["value"])
            devs[i].append(abs(v - large[i]))
            rows.append([N, x.real, x.imag, y.real, y.imag, v.real, v.imag,
                         large[i].real, large[i].imag])
    rep.table("mixed", ["N", "x_re", "x_im", "y_re", "y_im", "finite_re", "finite_im",
                        "large_re", "large_im"], rows)
    if len(ladder) >= 2:
        for i in devs:
            rep.check_range(f"exponent_point{i}", asy.fit_exponent(ladder, devs[i]), 1.5, 2.5)


def cmd_group_integrals(cfg, rep):
    seed = _seed(cfg)
    samples = int(cfg.get("samples", 1_000_000))
    pairs = cfg.get("pairs", [
        [[0.3, -0.5], [0.7, -0.2]], [[1.0, -1.0], [1.0, -1.0]], [[0.2, 0.9], [-0.4, 0.5]],
        [[-0.6, 0.4], [0.8, 0.1]], [[0.5, -0.2], [-0.9, 0.3]],
        [[0.3, -0.5, 0.1], [0.7, -0.2, 0.4]], [[0.9, -0.3, 0.2], [0.1, 0.6, -0.8]],
        [[-0.7, 0.4, 0.0], [0.5, -0.5, 0.25]], [[0.6, 0.1, -0.4], [-0.3, 0.2, 0.9]],
        [[0.2, -0.8, 0.5], [0.4, 0.0, -0.6]]])
    rows, ratios = [], {}
    for i, (a, b) in enumerate(pairs):
        r = hciz_value(DiagonalPair(a, b), samples, seed + i)
        if r["ratio"] is None:
            continue
        ratios.setdefault(r["N"], []).append((r["ratio"], r["ratio_err"]))
        rows.append([r["N"], i, r["formula"], r["mc_mean"], r["mc_err"], r["ratio"], r["ratio_err"]])
    rep.table("hciz", ["N", "pair", "formula", "mc_mean", "mc_err", "ratio", "ratio_err"], rows)
    for N, rs in sorted(ratios.items()):
        vals = np.array([v for v, _ in rs])
        errs = np.array([e for _, e in rs])
        w = 1 / errs ** 2
        mean = float(np.sum(w * vals) / np.sum(w))
        rep.summary[f"hciz_ratio_N{N}"] = mean
        rep.check(f"hciz_ratio_spread_N{N}", float(np.max(np.abs(vals - mean) / errs)), 3.0)
    mz = cfg.get("morozov", [[[1.0, -1.0], [1.0, -1.0], 3.0, 4.0],
                             [[0.5, -0.3, 0.2], [0.4, 0.1, -0.6], 2.5, 3.0]])
    for i, (a, b, x, y) in enumerate(mz):
        r = morozov_generating(DiagonalPair(a, b), x, y, samples, seed + 100 + i)
        rep.summary[f"morozov_{i}"] = r
        rep.check(f"morozov_{i}_z", abs(r["mc_mean"] - r["formula"]) / r["mc_err"], 3.0)


def cmd_loop(cfg, rep):
    model = _model(cfg).with_N(1)
    curve = loop.solve_genus0_curve(model)
    kmax = int(cfg.get("kmax", 6))
    rc = loop.residue_conditions(curve)
    rep.check("curve_equations", rc["max"], 1e-10)
    Tk = loop.leading_moments(curve, kmax)
    W = loop.resolvent_subleading(curve)
    T1 = W.moments(kmax)
    fd = loop.free_energy_derivatives(curve)
    rep.check("mu_probe_independence", max(abs(v - fd["dF_dT"]) for v in fd["dF_dT_probes"]), 1e-8)
    rep.check("subleading_residues", float(np.max(np.abs(W.residues()))), 1e-8)
    mod = loop.curve_moduli(curve)
    rep.summary.update(curve=curve.to_dict(), moduli=mod.to_dict(), T_k=Tk.tolist(),
                       T1_k=_num(T1), dF_dT=fd["dF_dT"], dF_dg=fd["dF_dg"],
                       dF_dgt=fd["dF_dgt"], free_energy=loop.free_energy(curve),
                       connected_22=loop.connected_moment(curve, 2, 2))
    lo, hi = loop.cut_endpoints(curve)
    xs = np.linspace(lo, hi, int(cfg.get("density_points", 41)))[1:-1]
    rep.table("equilibrium_density", ["x", "rho"],
              [[x, r] for x, r in zip(xs, loop.equilibrium_density(curve, xs))])
    rep.table("moments", ["k", "T_k", "T1_k"],
              [[k, Tk[k], float(np.real(T1[k]))] for k in range(kmax + 1)])
    E0 = loop.spectral_curve_E0(curve).coeffs
    rep.table("curve_E0", ["i", "j", "coeff"],
              [[i, j, E0[i, j]] for i in range(E0.shape[0]) for j in range(E0.shape[1])])
    xs_c = [hi + 0.7, hi + 2.0, lo - 1.1]
    rep.check("compose_YX", loop.compose_check(curve, xs_c), 1e-10)


def cmd_asymptotics(cfg, rep):
    model = _model(cfg)
    Ns = _ladder(cfg, [8, 12, 16])
    xs = [float(x) for x in cfg.get("x", [2.5, 3.5])]
    ks = [int(k) for k in cfg.get("k", [0, 1])]
    sweep = asy.asymptotic_error_sweep(model, Ns, xs, ks)
    rows = sorted(sweep["rows"], key=lambda r: (r["N"], r["k"], r["x"]))
    cols = ["N", "k", "x", "psi_exact", "psi_asym", "rel_err"]
    rep.table("error_sweep", cols, [[r[c] for c in cols] for r in rows])
    rep.plot("error_sweep", ["N", "x", "k", "rel_err"],
             [[r["N"], r["x"], r["k"], r["rel_err"]] for r in sorted(rows, key=lambda r: (r["N"], r["x"], r["k"]))])
    rep.check("mu_probe_independence", sweep["mu_spread"], 1e-8)
    for (k, x), p in sorted(sweep["exponent"].items()):
        rep.check_range(f"exponent_k{k}_x{x}", p, 0.7, 1.3)
    rep.summary["mu"] = sweep["mu"]
    rep.summary["h_ratio"] = [r["h_asym"] / r["h_exact"] for r in rows if r["k"] == 0][:len(Ns)]


def cmd_crossval(cfg, rep):
    """Finite-N moments along an N ladder against the ``1/N^2`` loop prediction."""
    model = _model(cfg)
    Ns = _ladder(cfg, [8, 12, 16])
    kmax = int(cfg.get("kmax", 4))
    curve = loop.solve_genus0_curve(model.with_N(1))
    T0 = loop.leading_moments(curve, kmax)
    T1 = np.real(loop.resolvent_subleading(curve).moments(kmax))
    rows = []
    for N in Ns:
        Q, _ = build_Q_P(build_family(model.with_N(N), N + 16))
        rows.append(trace_moments(Q, N, kmax) / N)
    rows = np.array(rows)
    Ns_f = np.array(Ns, float)
    # Richardson: fit m_k(N) = a + b/N^2 (+ c/N^4 when three sizes are available)
    order = min(len(Ns), 3)
    A = np.vstack([Ns_f ** (-2 * j) for j in range(order)]).T
    fit, *_ = np.linalg.lstsq(A, rows, rcond=None)
    coef = fit[1] if order > 1 else np.full(kmax + 1, np.nan)
    rel = np.abs(coef - T1) / np.maximum(np.abs(T1), 1e-3)
    rep.table("moments", ["N"] + [f"m{k}" for k in range(kmax + 1)],
              [[N] + list(r) for N, r in zip(Ns, rows)])
    rep.table("richardson", ["k", "leading", "fit_leading", "subleading", "fit_subleading"],
              [[k, T0[k], fit[0][k], T1[k], coef[k]] for k in range(kmax + 1)])
    rep.check("leading_moments", float(np.max(np.abs(fit[0] - T0))), 1e-4)
    rep.check("subleading_relative", float(np.max(rel)), 0.05)


COMMANDS = {
    "orthogonalize": cmd_orthogonalize,
    "operators": cmd_operators,
    "kernels": cmd_kernels,
    "densities": cmd_densities,
    "diffsys": cmd_diffsys,
    "curve": cmd_curve,
    "mixed": cmd_mixed,
    "group-integrals": cmd_group_integrals,
    "loop": cmd_loop,
    "asymptotics": cmd_asymptotics,
    "crossval": cmd_crossval,
}


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def emit_plot_data(report: dict, out) -> list:
    """Write one whitespace-separated ``.dat`` file per figure in the report."""
    out = Path(out)
    files = []
    for name, data in sorted(report.get("plots", {}).items()):
        path = out / f"{name}.dat"
        with open(path, "w") as fh:
            fh.write("# " + " ".join(data["columns"]) + "\n")
            for row in data["rows"]:
                fh.write(" ".join(_fmt(v) for v in row) + "\n")
        files.append(path.name)
    return files


def _write_tables(tables: dict, out: Path) -> list:
    files = []
    for name, (cols, rows) in sorted(tables.items()):
        path = out / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow([_fmt(v) for v in r])
        files.append(path.name)
    return files


def run_scenario(command: str, cfg: dict, out) -> dict:
    """Run one subcommand and write its outputs; returns the report dict.

    Library errors are caught and recorded under ``error``.
    """
    if command not in COMMANDS:
        raise ConfigInvalid(f"unknown subcommand {command!r}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    rep = _Report(cfg)
    error = None
    try:
        COMMANDS[command](cfg, rep)
    except BimatrixError as exc:
        error = {"code": exc.code, "message": str(exc)}
    report = {"command": command, "config": cfg, "precision": precision_mode(),
              "summary": _num(rep.summary), "invariants": rep.invariants,
              "plots": _num(rep.plots), "error": error}
    report["passed"] = error is None and all(v["pass"] for v in rep.invariants.values())
    files = _write_tables(rep.tables, out) + emit_plot_data(report, out)
    report["files"] = sorted(files)
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bimatrix",
                                     description="Two-matrix model numerical checks.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON scenario file")
    parser.add_argument("--out", default="out", help="output directory")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        report = run_scenario(args.command, cfg, args.out)
    except ConfigInvalid as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    if report["error"] is not None:
        code = 2 if report["error"]["code"] == ConfigInvalid.code else 3
        print(f"error [{report['error']['code']}]: {report['error']['message']}", file=sys.stderr)
        return code
    for name, inv in sorted(report["invariants"].items()):
        print(f"{'PASS' if inv['pass'] else 'FAIL'} {name} = {inv['value']:.3e}")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
