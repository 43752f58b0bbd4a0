import math

import pytest
from hypothesis import HealthCheck, settings

from evorescue.core import Boundary, Grid1D

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def desk_grid():
    return Grid1D(150.0, 1200)


@pytest.fixture(scope="session")
def small_grid():
    return Grid1D(40.0, 320)


@pytest.fixture(scope="session")
def dirichlet_grid():
    return Grid1D(50.0, 400, Boundary.DIRICHLET)


A0 = math.sqrt(0.3)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
