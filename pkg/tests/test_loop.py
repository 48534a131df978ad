import math

import numpy as np
import pytest
from scipy.integrate import quad

from bimatrix.biortho import build_family
from bimatrix.errors import CoincidentPoints, NewtonDiverged, OutsideCut
from bimatrix.kernels import one_point_density
from bimatrix.loop import (bergmann_two_point, compose_check, connected_moment, curve_moduli,
                           cut_endpoints, equilibrium_density, free_energy,
                           free_energy_derivatives, leading_moments, mixed_resolvent_large_n,
                           physical_X, physical_Y, residue_conditions, resolvent_subleading,
                           solve_genus0_curve, spectral_curve_E0)
from bimatrix.model import ModelSpec, Potential, gaussian_model, quartic_model, validate_model

EDGE = 2 * math.sqrt(2 / 3)


@pytest.fixture(scope="module")
def g0_curve():
    return solve_genus0_curve(gaussian_model(1))


@pytest.fixture(scope="module")
def q_curve():
    return solve_genus0_curve(quartic_model(0.025, 1))


def test_g0_closed_form(g0_curve):
    s = 1 / math.sqrt(3)
    assert g0_curve.gamma == pytest.approx(s, rel=1e-14)
    assert np.allclose(g0_curve.a, [0.0, 2 * s], atol=1e-14)
    assert np.allclose(sorted(g0_curve.branch_points().real), [-math.sqrt(2), math.sqrt(2)])
    assert np.allclose(sorted(g0_curve.x(g0_curve.branch_points()).real), [-EDGE, EDGE],
                       atol=1e-12)


def test_conditions(g0_curve, q_curve):
    for c in (g0_curve, q_curve):
        assert residue_conditions(c)["max"] < 1e-10


def test_reduces_to_gaussian():
    a = solve_genus0_curve(quartic_model(1e-7, 1))
    b = solve_genus0_curve(gaussian_model(1))
    assert a.gamma == pytest.approx(b.gamma, rel=1e-6)


def test_moments(g0_curve):
    T = leading_moments(g0_curve, 6)
    assert np.allclose(T, [1, 0, 2 / 3, 0, 8 / 9, 0, 40 / 27], atol=1e-13)


def test_free_energy(g0_curve, q_curve):
    d = free_energy_derivatives(g0_curve)
    assert d["dF_dg"][2] == pytest.approx(0.5 * 2 / 3, rel=1e-13)   # (T/2) T_2
    assert d["dF_dT"] == pytest.approx(1 + math.log(3), rel=1e-13)
    assert max(abs(v - d["dF_dT"]) for v in d["dF_dT_probes"]) < 1e-8
    # dF/dg_4 against a finite difference of F in the quartic coupling
    h = 1e-4
    F = lambda t: free_energy(solve_genus0_curve(quartic_model(t, 1)))
    fd = (F(0.025 + h) - F(0.025 - h)) / (2 * h)
    assert fd == pytest.approx(free_energy_derivatives(q_curve)["dF_dg"][4], rel=1e-6)


def test_bergmann(g0_curve):
    a = bergmann_two_point(g0_curve, 2.0, 3.0)
    b = bergmann_two_point(g0_curve, 3.0, 2.0)
    assert a["W11"] == pytest.approx(b["W11"])
    diag = bergmann_two_point(g0_curve, 2.0, 2.0, mixed=False)["W11"]
    near = bergmann_two_point(g0_curve, 2.0, 2.0 + 1e-5)["W11"]
    assert abs(diag - near) < 1e-3
    with pytest.raises(CoincidentPoints):
        bergmann_two_point(g0_curve, 2.0, 2.0)


def test_connected_moment(g0_curve):
    assert connected_moment(g0_curve, 2, 2) == pytest.approx(8 / 9, rel=1e-13)
    assert connected_moment(g0_curve, 1, 1) == pytest.approx(2 / 3, rel=1e-13)


def test_subleading_g0(g0_curve):
    W = resolvent_subleading(g0_curve)
    assert np.max(np.abs(W.residues())) < 1e-10
    m = W.moments(4)
    assert abs(m[0]) < 1e-10 and abs(m[1]) < 1e-10 and abs(m[2]) < 1e-10
    assert m[4] == pytest.approx(4 / 9, abs=1e-8)


def test_moduli(g0_curve):
    mod = curve_moduli(g0_curve)
    assert mod.genus == 0 and mod.filling_fractions == ()
    assert np.allclose(np.abs(mod.images), EDGE)


def test_density(g0_curve):
    lo, hi = cut_endpoints(g0_curve)
    assert (lo, hi) == pytest.approx((-EDGE, EDGE))
    semicircle = lambda x: 3 / (4 * math.pi) * math.sqrt(EDGE ** 2 - x ** 2)
    for x in (0.0, 0.8, -1.4):
        assert equilibrium_density(g0_curve, x) == pytest.approx(semicircle(x), rel=1e-9)
    total = quad(lambda x: equilibrium_density(g0_curve, x), lo, hi)[0]
    assert total == pytest.approx(1.0, abs=1e-7)
    with pytest.raises(OutsideCut):
        equilibrium_density(g0_curve, 2.0)


def test_density_against_finite_n():
    c = solve_genus0_curve(gaussian_model(1))
    fam = build_family(gaussian_model(16), 24)
    xs = np.linspace(-1.2, 1.2, 9)
    assert np.max(np.abs(one_point_density(fam, xs) - equilibrium_density(c, xs))) < 0.02


def test_sheets_and_E0(g0_curve, q_curve):
    for c in (g0_curve, q_curve):
        assert compose_check(c, [2.3, -3.0, 4.5]) < 1e-10
        E0 = spectral_curve_E0(c)
        for x in (2.5, -3.1):
            assert abs(E0(x, physical_Y(c, x))) < 1e-8 * max(1, abs(x) ** 4)
        # large x: Y(x) = V1'(x) - T/x + O(x^-3)
        x = 40.0
        assert physical_Y(c, x).real == pytest.approx(c.model.v1.deriv(x) - 1 / x, abs=1e-4)
        assert physical_X(c, x).real == pytest.approx(c.model.v2.deriv(x) - 1 / x, abs=1e-4)
    E = spectral_curve_E0(g0_curve).monic()
    assert E[0, 0] == pytest.approx(1.5) and E[1, 1] == pytest.approx(-2.5)


def test_mixed_large_n_limit(g0_curve):
    x = y = 300.0
    assert mixed_resolvent_large_n(g0_curve, x, y) == pytest.approx(1 / (x * y), rel=1e-2)


def test_two_cut_regime_rejected():
    m = validate_model(ModelSpec(Potential((0.0, -3.0, 0.0, 1.0)), Potential((0.0, 2.0)), 1.0, 1))
    with pytest.raises(NewtonDiverged):
        solve_genus0_curve(m)
