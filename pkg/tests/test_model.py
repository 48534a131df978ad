import json

import numpy as np
import pytest

from bimatrix.errors import ConfigInvalid, NonHermitianModel
from bimatrix.model import (ModelSpec, Potential, gaussian_model, load_model, model_from_dict,
                            quartic_model, validate_model)


def test_potential_convention():
    V = Potential((0.0, 2.0, 0.0, 0.1))
    assert V.degree == 4 and V.d == 3 and V.leading == 0.1
    assert V(2.0) == pytest.approx(2.0 * 4 / 2 + 0.1 * 16 / 4)
    assert V.deriv(2.0) == pytest.approx(2.0 * 2 + 0.1 * 8)
    assert V.deriv2(2.0) == pytest.approx(2.0 + 0.3 * 4)
    assert np.allclose(V.monomial(), [0, 0, 1.0, 0, 0.025])
    Q = np.diag([1.0, 2.0])
    assert np.allclose(V.deriv_of_matrix(Q), np.diag([V.deriv(1.0), V.deriv(2.0)]))


def test_trailing_zeros_stripped():
    assert Potential((0.0, 2.0, 0.0, 0.0)).degree == 2
    with pytest.raises(ConfigInvalid):
        Potential((0.0, 0.0))


def test_gaussian_reference():
    m = gaussian_model(3)
    assert m.d1 == m.d2 == 1
    assert m.coupling == 3.0
    assert m.center == pytest.approx((0.0, 0.0), abs=1e-2)


@pytest.mark.parametrize("v1", [(0.0, 2.0, 1.0), (0.0, 2.0, 0.0, 0.0, 1.0), (0.0, 2.0, 0.0, -0.1)])
def test_rejects_non_hermitian(v1):
    with pytest.raises(NonHermitianModel):
        validate_model(ModelSpec(Potential(v1), Potential((0.0, 2.0)), 1.0, 1))


def test_rejects_unbounded_quadratic_form():
    with pytest.raises(NonHermitianModel):
        validate_model(ModelSpec(Potential((0.0, 0.9)), Potential((0.0, 1.0)), 1.0, 1))


def test_bad_temperature_and_size():
    with pytest.raises(ConfigInvalid):
        validate_model(ModelSpec(Potential((0.0, 2.0)), Potential((0.0, 2.0)), -1.0, 1))
    with pytest.raises(ConfigInvalid):
        validate_model(ModelSpec(Potential((0.0, 2.0)), Potential((0.0, 2.0)), 1.0, 0))


def test_swap_and_with_N():
    m = quartic_model(0.05, 4)
    s = m.swapped()
    assert (s.d1, s.d2) == (1, 3)
    assert m.with_N(7).N == 7 and m.with_N(7).v1 == m.v1


def test_json_round_trip(tmp_path):
    m = quartic_model(0.025, 2)
    path = tmp_path / "m.json"
    path.write_text(m.spec.to_json())
    assert load_model(path).spec == m.spec
    with pytest.raises(ConfigInvalid):
        model_from_dict({"v1": [0, 2]})
    assert json.loads(m.spec.to_json())["N"] == 2


def test_double_well_is_admissible():
    m = validate_model(ModelSpec(Potential((0.0, -1.0, 0.0, 1.0)), Potential((0.0, 2.0)), 1.0, 1))
    assert m.d1 == 3
