import numpy as np
import pytest

from ghostfield.units import Configuration


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def sharp_pair(R=1.0, q=1.0, t=1.0, coupling="em"):
    return Configuration(coupling, q, [(0.0, 0.0, 0.0)], [(R, 0.0, 0.0)], t)


#: One line per acceptance criterion, filled by test_acceptance.py.
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
