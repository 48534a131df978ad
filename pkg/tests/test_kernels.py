import numpy as np
import pytest
from scipy.integrate import quad

from bimatrix.biortho import build_family
from bimatrix.errors import UnsupportedOrder
from bimatrix.kernels import (cd_identity_residual, cd_matrices, correlation_density,
                              histogram_comparison, kernel_set, metropolis_sampler,
                              one_point_density)
from bimatrix.model import gaussian_model, quartic_model
from bimatrix.operators import build_Q_P
from bimatrix.quadrature import direct_density_oracle


def test_cd_blocks(quartic_ops):
    Q, P = quartic_ops
    A, B = cd_matrices(Q, P, 6)
    assert A.outside < 1e-12 and B.outside < 1e-12
    with pytest.raises(Exception):
        cd_matrices(Q, P, 1)


def test_cd_identity(quartic_family, quartic_ops):
    grid = np.linspace(-1.5, 1.5, 8)
    assert cd_identity_residual(quartic_family, quartic_ops[0], 4, grid, grid) < 1e-6


@pytest.mark.parametrize("N", [1, 2])
def test_kernel_density_vs_bruteforce(N):
    m = quartic_model(0.05, N)
    fam = build_family(m, 16)
    pts = [-0.9, 0.1, 0.8]
    for r, s, p in [(1, 0, pts), (0, 1, pts), (1, 1, list(zip(pts, pts[::-1])))]:
        got = correlation_density(fam, r, s, p)
        ref = direct_density_oracle(m, r, s, p)
        assert np.max(np.abs(got - ref)) < 1e-6


def test_density_normalized():
    fam = build_family(gaussian_model(3), 16)
    total = quad(lambda x: one_point_density(fam, [x])[0], -6, 6, epsabs=1e-12)[0]
    assert total == pytest.approx(1.0, abs=1e-8)


def test_one_point_matches_determinant_form():
    fam = build_family(gaussian_model(2), 12)
    pts = [-0.4, 0.7]
    assert np.allclose(one_point_density(fam, pts), correlation_density(fam, 1, 0, pts), atol=1e-12)


def test_unsupported_order(g0_family):
    with pytest.raises(UnsupportedOrder):
        correlation_density(g0_family, 3, 0, [(0.0, 0.1, 0.2)])


def test_kernel_shapes(g0_family):
    ks = kernel_set(g0_family, [0.1, 0.2], [0.3], n=1)
    assert ks.K11().shape == (2, 2) and ks.K21().shape == (1, 2)


def test_sampler_deterministic_and_consistent():
    m = gaussian_model(2)
    a = metropolis_sampler(m, 4000, seed=11, chains=8)
    b = metropolis_sampler(m, 4000, seed=11, chains=8)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    fam = build_family(m, 12)
    edges = np.linspace(-2.5, 2.5, 11)
    cmp_ = histogram_comparison(a.x, lambda p: one_point_density(fam, p), edges)
    assert cmp_["exact"].sum() == pytest.approx(1.0, abs=1e-3)
    assert cmp_["max_z"] < 5.0
