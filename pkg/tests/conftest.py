import numpy as np
import pytest

from bigjump import _kernels


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the numba kernels once so per-test timings stay honest
    _kernels.warmup()


def rng_from(*entropy) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


@pytest.fixture
def rng() -> np.random.Generator:
    return rng_from(20260808)


# one PASS/FAIL line per acceptance criterion, echoed at session end
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
