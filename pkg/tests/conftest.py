import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dualband.data import B28, B140, Mpc
from dualband.sounder import Scene

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[B28, B140], ids=["B28", "B140"])
def band(request):
    return request.param


@pytest.fixture
def single_mpc_scene():
    return Scene((Mpc(50e-9, 45.0, -80.0),), B28, tx_rx_distance=15.0, link_id="one")


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
