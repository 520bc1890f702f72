import numpy as np
import pytest

from risgmlb import RicianParams, generate_channel, noise_from_snr
from risgmlb.gmlb import init_state

ACCEPTANCE_LINES = []


@pytest.fixture
def ch444():
    return generate_channel(RicianParams(4, 4, 4), 7)


@pytest.fixture
def noise20():
    return noise_from_snr(20.0, 1000.0)


@pytest.fixture
def state444(ch444):
    return init_state(ch444, 1000.0, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
