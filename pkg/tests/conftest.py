import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cbw_gyro.cavity import CavityConfig, default_grid, sweep  # noqa: E402


@pytest.fixture(scope="session")
def base_cfg():
    return CavityConfig(r=0.999, max_order=5000)


@pytest.fixture(scope="session")
def base_grid():
    return default_grid(-2 * math.pi, 2 * math.pi, 40001)


@pytest.fixture(scope="session")
def base_raw(base_cfg, base_grid):
    """Unnormalized default sweep; shared because it is the expensive part."""
    return sweep(base_cfg, grid=base_grid, normalize=False)


@pytest.fixture(scope="session")
def base_trace(base_raw):
    return base_raw.normalize()


@pytest.fixture
def rng():
    return np.random.default_rng(20211105)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
