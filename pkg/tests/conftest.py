import math

import numpy as np
import pytest

from qbound.povm import povm_from_vectors

#: Filled by test_acceptance.py, printed once at the end of the session.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


def planar(deg):
    t = math.radians(deg)
    return [math.cos(t), 0.0, math.sin(t)]


@pytest.fixture
def trine():
    # 90, 210, 330 degrees in the xz-plane
    return povm_from_vectors(2, [(2 / 3, planar(a)) for a in (90, 210, 330)])


@pytest.fixture
def cross():
    return povm_from_vectors(2, [(0.5, [1, 0, 0]), (0.5, [-1, 0, 0]), (0.5, [0, 0, 1]), (0.5, [0, 0, -1])])


@pytest.fixture
def worked():
    """60/0/120/240 degree POVM; 0.4667 and 0.7667 are 7/15 and 23/30."""
    return povm_from_vectors(2, [(0.3, planar(60)), (7 / 15, planar(0)), (7 / 15, planar(120)), (23 / 30, planar(240))])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
