import os

import pytest

from nsverify import FluidParams, Grid, SolutionFamily, TimeProfile

os.environ.setdefault("NS_VERIFY_THREADS", "2")

KAPPA = 0.02
ABC = (1.0, 0.5, 0.25)
CRITERION_LINES: dict[int, str] = {}


def certified_families(kappa=KAPPA):
    """The four families certified by default, forced ones with matched exponential forcing."""
    return [
        SolutionFamily.taylor_vortex(),
        SolutionFamily.forced_taylor_vortex(TimeProfile.exponential(1.0, 2 * 3.141592653589793**2 * kappa)),
        SolutionFamily.abc_flow(*ABC),
        SolutionFamily.forced_abc_flow(*ABC, TimeProfile.exponential(1.0, 3.141592653589793**2 * kappa)),
    ]


@pytest.fixture
def fluid():
    return FluidParams(KAPPA, 1.0)


@pytest.fixture
def grid2():
    return Grid.cube(2, 32)


@pytest.fixture
def grid3():
    return Grid.cube(3, 16)


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERION_LINES):
            terminalreporter.write_line(CRITERION_LINES[k])
