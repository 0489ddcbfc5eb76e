import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from asced.code import from_pcm
from asced.families import bch_pcm, hamming_pcm
from asced.gf2 import BitMatrix

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

HAMMING_ROWS = ["1010101", "0110011", "0001111"]


@pytest.fixture(scope="session")
def hamming_h():
    return BitMatrix.from_strings(HAMMING_ROWS)


@pytest.fixture(scope="session")
def hamming(hamming_h):
    return from_pcm(hamming_h)


@pytest.fixture(scope="session")
def bch15():
    return from_pcm(bch_pcm(4, 2))


@pytest.fixture(scope="session")
def bch63():
    return from_pcm(bch_pcm(6, 6))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE]

    def record(criterion: str, passed: bool, detail: str) -> bool:
        lines.append(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} ({detail})")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
