import numpy as np
import pytest
from scipy.integrate import quad

from bimatrix.biortho import build_family, heine_check, parity_defect
from bimatrix.model import gaussian_model, quartic_model


def test_g0_norm_ratios_and_recurrence():
    fam = build_family(gaussian_model(2), 12)
    assert fam.h[1] / fam.h[0] == pytest.approx(1 / 6, rel=1e-12)     # 1/(3N)
    n = np.arange(11)
    assert np.allclose(fam.gamma ** 2, (n + 1) / 6, rtol=1e-12)


def test_g0_single_ratio():
    fam = build_family(gaussian_model(1), 4)
    assert fam.h[1] / fam.h[0] == pytest.approx(1 / 3, rel=1e-13)


@pytest.mark.parametrize("model", [gaussian_model(8), quartic_model(0.05, 8)])
def test_orthogonality(model):
    assert build_family(model, 12).residual < 1e-8


def test_parity(quartic_family):
    assert parity_defect(quartic_family) < 1e-30


def test_float_and_mp_wave_values_agree(quartic_family):
    pts = np.linspace(-2, 2, 9)
    a = quartic_family.wave_values(pts, 12, method="mp")
    b = quartic_family.wave_values(pts, 12, method="float")
    assert np.max(np.abs(a - b)) < 1e-10 * np.max(np.abs(a))


def test_wave_derivative_by_difference(quartic_family):
    pts = np.array([-0.7, 0.2, 1.1])
    h = 1e-5
    d = quartic_family.wave_derivative(pts, 6)
    fd = (quartic_family.wave_values(pts + h, 6) - quartic_family.wave_values(pts - h, 6)) / (2 * h)
    assert np.allclose(d, fd, atol=1e-7)


def test_transform_against_direct_quadrature():
    fam = build_family(quartic_model(0.05, 2), 8)
    c = fam.model.coupling
    xs = np.array([-0.8, 0.3, 1.2])
    got = fam.transform_values(xs, 3, side="x")
    for i, x in enumerate(xs):
        for n in range(3):
            ref = quad(lambda y: fam.wave_values([y], 3, side="y", method="float")[0, n]
                       * np.exp(c * x * y), -12, 12, limit=200, epsabs=1e-14)[0]
            assert got[i, n] == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_heine_small():
    fam = build_family(quartic_model(0.05, 1), 6)
    assert heine_check(fam, 1) < 1e-6


def test_csv(tmp_path, quartic_family):
    path = tmp_path / "f.csv"
    quartic_family.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("family,n,h_n")
    assert len(lines) == 1 + 2 * quartic_family.M
