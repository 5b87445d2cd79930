import math
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from quasiprob import maximally_mixed
from quasiprob.figures import pauli_pair, spin_pair, tilted_state

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

GOLDEN = Path(__file__).parent / "golden"

# (criterion number, passed, summary) filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, summary in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {summary}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def pauli():
    return pauli_pair()


@pytest.fixture
def mixed2():
    return maximally_mixed(2)


@pytest.fixture
def tilted():
    return tilted_state()


@pytest.fixture
def spin32():
    return spin_pair(1.5)


@pytest.fixture
def golden_dir():
    return GOLDEN


HALF_PI = math.pi / 2
