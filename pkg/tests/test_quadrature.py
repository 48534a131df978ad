import math

import numpy as np
import pytest

from bimatrix.errors import OracleTooLarge
from bimatrix.model import gaussian_model, quartic_model
from bimatrix.quadrature import (bimoment_matrix, direct_density_oracle, heine_oracle,
                                 mixed_resolvent_oracle_n1, partition_function_smallN)

# G0 at N = 1: the weight is exp(-(x^2 + y^2 - x y)), a Gaussian with
# covariance (1/3) [[2, 1], [1, 2]]
I00 = 2 * math.pi / math.sqrt(3)
RHO10_0 = math.sqrt(3 / (4 * math.pi))      # 0.48860...
RHO11_00 = math.sqrt(3) / (2 * math.pi)     # 0.27566...


def test_g0_bimoments_closed_form():
    I = bimoment_matrix(gaussian_model(1), 4).as_float()
    assert I[0, 0] == pytest.approx(I00, rel=1e-14)
    assert I[2, 0] / I[0, 0] == pytest.approx(2 / 3, rel=1e-14)
    assert I[1, 1] / I[0, 0] == pytest.approx(1 / 3, rel=1e-14)
    assert I[1, 0] == pytest.approx(0.0, abs=1e-14)


def test_frozen_density_values():
    assert RHO10_0 == pytest.approx(0.48860, abs=1e-5)
    assert RHO11_00 == pytest.approx(0.27566, abs=1e-5)
    m = gaussian_model(1)
    assert direct_density_oracle(m, 1, 0, [0.0])[0] == pytest.approx(RHO10_0, rel=1e-8)
    assert direct_density_oracle(m, 1, 1, [(0.0, 0.0)])[0] == pytest.approx(RHO11_00, rel=1e-8)


@pytest.mark.parametrize("model", [gaussian_model(2), quartic_model(0.05, 2)])
def test_partition_function_matches_bimoment_determinant(model):
    Z, err = partition_function_smallN(model)
    I = bimoment_matrix(model, 2).as_float()
    assert err < 1e-8
    assert Z == pytest.approx(math.factorial(2) * np.linalg.det(I), rel=1e-8)


def test_heine_oracle_degree_one_is_mean():
    m = quartic_model(0.05, 1)
    I = bimoment_matrix(m, 2).as_float()
    xs = np.array([-1.0, 0.5])
    assert np.allclose(heine_oracle(m, 1, xs), xs - I[1, 0] / I[0, 0], atol=1e-12)


def test_oracle_limits():
    with pytest.raises(OracleTooLarge):
        direct_density_oracle(gaussian_model(3), 1, 0, [0.0])
    with pytest.raises(OracleTooLarge):
        heine_oracle(gaussian_model(1), 3, [0.0])
    with pytest.raises(OracleTooLarge):
        mixed_resolvent_oracle_n1(gaussian_model(2), 3.0, 3.0)


def test_mixed_oracle_large_arguments():
    v = mixed_resolvent_oracle_n1(gaussian_model(1), 200.0, 300.0)
    assert v == pytest.approx(1 / 60000, rel=1e-4)


def test_double_mode_close_to_extended():
    a = bimoment_matrix(quartic_model(0.05, 2), 6, mode="double").as_float()
    b = bimoment_matrix(quartic_model(0.05, 2), 6, mode="extended").as_float()
    assert np.allclose(a, b, rtol=1e-10)
