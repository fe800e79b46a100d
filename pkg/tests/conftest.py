import numpy as np
import pytest

from ulboltz import collision
from ulboltz.grid import build_spatial_grid, build_velocity_grid
from ulboltz.kernel import CrossSectionParams
from ulboltz.weights import WeightParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def vgrid4():
    return build_velocity_grid(3.0, 4)


@pytest.fixture(scope="session")
def kparams4(vgrid4):
    return CrossSectionParams(-0.5, 0.25, 1.0, 0.2, 0.5 * vgrid4.h)


@pytest.fixture(scope="session")
def ws4(vgrid4, kparams4):
    return collision.CollisionWorkspace(vgrid4, kparams4, 4, 8)


@pytest.fixture(scope="session")
def wparams():
    return WeightParams(1.0, 0.5)


@pytest.fixture(scope="session")
def sgrid8():
    return build_spatial_grid(2.0, 8, 1)


_ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record one acceptance line: acceptance(number, title, passed, detail)."""
    def record(number, title, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} {title}: {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
