import numpy as np
import pytest

from bianchi_fermions.background import PowerLaw

KASNER_P = (2 / 3, 2 / 3, -1 / 3)


@pytest.fixture
def kasner():
    return PowerLaw((1.0, 1.0, 1.0), KASNER_P, t_ref=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", {}) if mod else {}
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines, key=str):
        terminalreporter.write_line(lines[key])
