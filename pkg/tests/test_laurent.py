from fractions import Fraction

import numpy as np
import pytest

from bimatrix.laurent import Laurent


def test_arithmetic_and_evaluation():
    x = Laurent.from_dict({1: 1.0, -1: 2.0})
    sq = x * x
    assert sq.terms() == {-2: 4.0, 0: 4.0, 2: 1.0}
    z = 1.7
    assert sq(z) == pytest.approx((z + 2 / z) ** 2)
    assert (x - x).terms() == {}
    assert (2 * x + 1).coef(0) == 1.0


def test_fractions_preserved():
    x = Laurent(np.array([Fraction(2), Fraction(0), Fraction(1)], dtype=object), -1)
    assert (x ** 2).terms() == {-2: Fraction(4), 0: Fraction(4), 2: Fraction(1)}


def test_inverse_at_infinity():
    x = Laurent.from_dict({1: 1.0, -1: 2.0})
    inv = x.inverse_at_infinity(-9)
    prod = (inv * x).truncate(-7)
    assert prod.coef(0) == pytest.approx(1.0)
    for k in range(-7, 0):
        assert prod.coef(k) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        inv.coef(-12)


def test_residues_and_derivative():
    f = Laurent.from_dict({-1: 3.0, 2: 1.0})
    assert f.residue_at_infinity() == -3.0
    assert f.residue_at_zero() == 3.0
    assert f.deriv().terms() == {-2: -3.0, 1: 2.0}
    assert Laurent.from_dict({1: 1.0}).compose_poly([1.0, 0.0, 2.0]).terms() == {0: 1.0, 2: 2.0}
