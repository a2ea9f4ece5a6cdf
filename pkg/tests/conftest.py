import numpy as np
import pytest
from hypothesis import settings

from relwave.grid import SpectralGrid
from relwave.units import NATURAL

settings.register_profile("relwave", max_examples=40, deadline=None)
settings.load_profile("relwave")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def grid():
    return SpectralGrid(1, 256, 20.0)


@pytest.fixture
def small_grid():
    return SpectralGrid(1, 32, 2 * np.pi)


@pytest.fixture
def params():
    return NATURAL


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
