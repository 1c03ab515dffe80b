import math

import pytest
from hypothesis import settings

from yamabe_lab.curvature import flat_jet, synthetic_jet
from yamabe_lab.quadrature import gauss_radial_grid
from yamabe_lab.test_functions import AubinProfile, aubin_field

settings.register_profile("lab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("lab")

ACCEPTANCE_LINES: list[str] = []


def aubin(n, eps, r, amplitude=1.0):
    grid = gauss_radial_grid(r, scale=math.sqrt(eps), breakpoints=(r / 2,))
    return aubin_field(AubinProfile(n, eps, r, amplitude), grid)


@pytest.fixture(scope="session")
def jets():
    """Seed-0 jets with scalar0 = -1 and small Weyl part, validity radius > 3."""
    return {n: synthetic_jet(n, 0, -1.0, 0.02) for n in (4, 5, 6)}


@pytest.fixture(scope="session")
def flat():
    return {n: flat_jet(n) for n in (3, 4, 5, 6)}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
