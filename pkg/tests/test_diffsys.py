import numpy as np
import pytest

from bimatrix.diffsys import (build_system, curve_agreement, derivative_residual,
                              dual_folding_matrix, duality_residual, expected_trace,
                              folding_matrix, folding_residual, liouville_residual,
                              spectral_curve_finite_n, trace_identity_residual)
from bimatrix.errors import TruncationTooSmall


@pytest.fixture(scope="module")
def g0_systems(g0_family, g0_ops):
    Q, P = g0_ops
    m = g0_family.model
    return m, Q, P, {k: build_system(Q, P, m, 6, k) for k in ("D1", "D1~", "D2", "D2~")}


@pytest.fixture(scope="module")
def d3_systems(d2_three):
    m, fam, (Q, P) = d2_three
    return m, fam, Q, P, {k: build_system(Q, P, m, 8, k) for k in ("D1", "D1~", "D2", "D2~")}


def test_folding(d3_systems):
    m, fam, Q, P, _ = d3_systems
    f = folding_matrix(Q, 8, 0.4)
    assert folding_residual(fam, f) < 1e-8
    g = dual_folding_matrix(Q, 8, 0.4)
    assert folding_residual(fam, g, dual=True) < 1e-8


def test_constructions_agree(g0_systems, d3_systems):
    for S in (g0_systems[3], d3_systems[4]):
        assert S["D1"].discrepancy < 1e-6 and S["D2"].discrepancy < 1e-6


def test_duality(g0_systems, d3_systems):
    for m, Q, P, S in (g0_systems, d3_systems[:1] + d3_systems[2:]):
        assert duality_residual(S["D1"], S["D1~"], Q, P) < 1e-6
        assert duality_residual(S["D2"], S["D2~"], Q, P) < 1e-6


def test_trace_identity(g0_systems, d3_systems):
    m, _, _, S = g0_systems
    # G0: V1'(x) = 2x plus x / g~2 from the linear V2'
    assert np.allclose(expected_trace(m, "D1~"), [0.0, 2.5])
    assert trace_identity_residual(S["D1~"], m) < 1e-8
    m3, _, _, _, S3 = d3_systems
    assert trace_identity_residual(S3["D1~"], m3) < 1e-8
    assert trace_identity_residual(S3["D2~"], m3) < 1e-8


def test_wave_function_equations(d3_systems):
    m, fam, Q, P, S = d3_systems
    assert derivative_residual(fam, S["D1"]) < 1e-8
    assert derivative_residual(fam, S["D1~"]) < 1e-6


def test_liouville(g0_systems):
    m, _, _, S = g0_systems
    assert liouville_residual(S["D1"], m) < 1e-6


def test_curves_agree(g0_systems, d3_systems):
    m, _, _, S = g0_systems
    curves = [spectral_curve_finite_n(D, m) for D in S.values()]
    assert curve_agreement(curves) < 1e-6
    E = curves[0].monic()
    # G0: E_n = y^2 + x^2 - (5/2) x y + (3/2)(n/N); at n = N this is the large-N curve
    ref = np.zeros((3, 3))
    ref[0, 2], ref[2, 0], ref[1, 1], ref[0, 0] = 1.0, 1.0, -2.5, 1.5 * 6
    assert np.allclose(E, ref, atol=1e-8)
    m3, _, _, _, S3 = d3_systems
    c3 = [spectral_curve_finite_n(D, m3) for D in S3.values()]
    assert curve_agreement(c3) < 1e-6


def test_window_checks(g0_ops, g0_family):
    Q, P = g0_ops
    with pytest.raises(TruncationTooSmall):
        build_system(Q, P, g0_family.model, Q.size - 2, "D1")
