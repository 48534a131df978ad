import numpy as np
import pytest

from bimatrix.biortho import build_family
from bimatrix.errors import TruncationTooSmall
from bimatrix.model import gaussian_model
from bimatrix.operators import (band_leakage, build_Q_P, connected_trace_moment,
                                heisenberg_residual, string_equation_residual, trace_moments)


def test_shapes_and_superdiagonal(g0_family, g0_ops):
    Q, P = g0_ops
    assert Q.size == g0_family.M - 1
    assert np.allclose(np.diag(Q.matrix, 1), g0_family.gamma[:Q.size - 1], rtol=1e-13)
    # G0 at N = 1: gamma_n^2 = (n+1)/3 and Q = P by symmetry
    n = np.arange(Q.size - 1)
    assert np.allclose(np.diag(Q.matrix, 1) ** 2, (n + 1) / 3, rtol=1e-12)
    assert np.allclose(Q.matrix, P.matrix, atol=1e-12)


@pytest.mark.parametrize("which", ["g0", "quartic"])
def test_identities(which, g0_ops, quartic_ops, g0_family, quartic_family):
    Q, P = g0_ops if which == "g0" else quartic_ops
    model = (g0_family if which == "g0" else quartic_family).model
    assert band_leakage(Q) < 1e-8 and band_leakage(P) < 1e-8
    assert string_equation_residual(Q, P, model)["max"] < 1e-8
    assert heisenberg_residual(Q, P, model)["max"] < 1e-8


def test_quartic_bandwidth(quartic_ops):
    Q, P = quartic_ops
    assert (Q.lower, P.lower) == (1, 3)
    assert abs(P.alpha(3, 10)) > 1e-3


@pytest.mark.parametrize("N", [4, 8])
def test_exact_gaussian_fourth_moment(N):
    # the M1 marginal is Gaussian with weight exp(-N c x^2 / 2), c = 3/2
    Q, _ = build_Q_P(build_family(gaussian_model(N), N + 6))
    m = trace_moments(Q, N, 4)
    assert m[2] / N == pytest.approx(2 / 3, rel=1e-12)
    assert m[4] / N == pytest.approx(8 / 9 + (4 / 9) / N ** 2, rel=1e-12)
    assert connected_trace_moment(Q, N) == pytest.approx(8 / 9, rel=1e-10)


def test_truncation_errors():
    fam = build_family(gaussian_model(1), 4)
    with pytest.raises(TruncationTooSmall):
        build_Q_P(fam, min_size=10)
    Q, _ = build_Q_P(build_family(gaussian_model(1), 8))
    with pytest.raises(TruncationTooSmall):
        trace_moments(Q, 6, 4)


def test_operator_csv(tmp_path, g0_ops):
    path = tmp_path / "q.csv"
    g0_ops[0].to_csv(path)
    rows = path.read_text().splitlines()
    assert rows[0] == "n,m,value"
    assert len(rows) == 1 + 3 * g0_ops[0].size - 2
