"""Shared fixtures and the acceptance summary printed after the run."""

import pytest

from bimatrix.biortho import build_family
from bimatrix.model import gaussian_model, quartic_model
from bimatrix.operators import build_Q_P

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}
CRITERIA = {
    1: "biorthogonality residual",
    2: "Heine oracle",
    3: "operator identities",
    4: "CD identity and kernels",
    5: "differential systems",
    6: "mixed resolvent",
    7: "group integrals",
    8: "loop engine anchors",
    9: "cross-regime validation",
    10: "asymptotic ansatz",
    11: "determinism",
}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k, name in CRITERIA.items():
        if k in ACCEPTANCE:
            ok, detail = ACCEPTANCE[k]
            terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d} NOT RUN  {name}")


@pytest.fixture(scope="session")
def g0():
    return gaussian_model(1)


@pytest.fixture(scope="session")
def g0_family():
    return build_family(gaussian_model(1), 24)


@pytest.fixture(scope="session")
def g0_ops(g0_family):
    return build_Q_P(g0_family)


@pytest.fixture(scope="session")
def quartic_family():
    return build_family(quartic_model(0.05, 4), 24)


@pytest.fixture(scope="session")
def quartic_ops(quartic_family):
    return build_Q_P(quartic_family)


@pytest.fixture(scope="session")
def d2_three():
    """A model with ``d1 = 1``, ``d2 = 3`` (the mirror of a quartic model)."""
    m = quartic_model(1.0, 8).swapped()
    fam = build_family(m, 30)
    return m, fam, build_Q_P(fam)
