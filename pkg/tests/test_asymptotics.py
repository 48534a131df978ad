import math

import numpy as np
import pytest
from scipy.integrate import quad

from bimatrix.asymptotics import (asymptotic_data, asymptotic_error_sweep, asymptotic_psi,
                                  effective_exponent, effective_exponent_path, write_error_table)
from bimatrix.biortho import build_family
from bimatrix.errors import ConfigInvalid, InsideCutRegion
from bimatrix.model import gaussian_model


@pytest.fixture(scope="module")
def g0_data():
    return asymptotic_data(gaussian_model(1))


def test_normalizations(g0_data):
    assert g0_data.H(1e7) == pytest.approx(1.0, abs=1e-6)
    assert g0_data.H_tilde(1e-7) == pytest.approx(1.0, abs=1e-6)
    assert g0_data.mu == pytest.approx(1 + math.log(3), rel=1e-13)
    assert g0_data.mu_spread < 1e-8


def test_exponent_limit_and_path(g0_data):
    c = g0_data.curve
    z = 1e4
    x = c.x(z)
    assert abs(effective_exponent(g0_data, z) - (x * x - math.log(x))) < 1e-6
    z3 = c.x_preimages(3.0)[0]
    assert abs(effective_exponent(g0_data, z3) - effective_exponent_path(g0_data, z3)) < 1e-8


def test_exponent_against_hermite(g0_data):
    # the M1 marginal is Gaussian (c = 3/2); T(x) = V1(x) - int ln(x - s) rho(s) ds
    a = 2 * math.sqrt(2 / 3)
    G = lambda t: 2 * (t - math.sqrt(t * t - a * a)) / a ** 2
    g3 = math.log(3) - quad(lambda t: G(t) - 1 / t, 3, np.inf)[0]
    z = g0_data.curve.x_preimages(3.0)[0]
    assert effective_exponent(g0_data, z).real == pytest.approx(9 - g3, abs=1e-9)


def test_mu_independence(g0_data):
    c = g0_data.curve
    for z in (1.3, 2.0 + 0.7j, -1.8 - 0.4j):
        v = effective_exponent(g0_data, z) + effective_exponent(g0_data, z, "y") - c.x(z) * c.y(z)
        assert abs(v - g0_data.mu) < 1e-10


def test_psi_and_norms_at_n12(g0_data):
    N = 12
    fam = build_family(gaussian_model(N), N + 4)
    p = asymptotic_psi(g0_data, N, 0, 2.5)
    exact = fam.wave_values([2.5], N + 1)[0, N]
    assert abs(p["psi"] / exact - 1) < 0.1
    assert 0.9 < p["h"] / fam.h[N] < 1.1


def test_inside_cut(g0_data):
    with pytest.raises(InsideCutRegion):
        asymptotic_psi(g0_data, 8, 0, 1.0)


def test_temperature_restriction():
    with pytest.raises(ConfigInvalid):
        asymptotic_data(gaussian_model(1, T=2.0))


def test_sweep(tmp_path):
    r = asymptotic_error_sweep(gaussian_model(1), [8, 12], [2.5, 4.0], ks=(0, 1))
    rows = r["rows"]
    assert [(q["N"], q["k"], q["x"]) for q in rows] == sorted((q["N"], q["k"], q["x"]) for q in rows)
    by = {(q["N"], q["k"], q["x"]): q["rel_err"] for q in rows}
    for k in (0, 1):
        for x in (2.5, 4.0):
            assert by[(12, k, x)] < by[(8, k, x)]
        assert by[(8, k, 4.0)] < by[(8, k, 2.5)]
    write_error_table(rows, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text().startswith("N,k,x,psi_exact,psi_asym,rel_err")


def test_recursion_coefficient_scaling():
    # gamma_{N-1} approaches sqrt(gamma gamma~) at rate 1/N^2 (T = 1, n/N -> 1)
    from bimatrix.model import quartic_model
    d = asymptotic_data(quartic_model(0.5, 1))
    g = math.sqrt(d.gamma * d.gamma_t)
    errs = [abs(build_family(quartic_model(0.5, N), N + 6).gamma[N - 1] - g) for N in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2]
    assert -np.polyfit(np.log([4, 8, 16]), np.log(errs), 1)[0] == pytest.approx(2.0, abs=0.1)
