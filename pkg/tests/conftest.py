import numpy as np
import pytest

from pollination.benchmarks import registry_lookup
from pollination.core import make_rng

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_RESULTS = {}


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def sphere2():
    return registry_lookup("sphere", 2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[1:])):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{key}: {'PASS' if passed else 'FAIL'}  {detail}")


def random_points(seed, bounds, size, dim):
    return np.random.default_rng(seed).uniform(bounds.lower, bounds.upper, (size, dim))
