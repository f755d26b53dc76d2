import numpy as np
import pytest

from genpr.core import Ensemble

S1 = np.eye(2)
S2 = np.diag([1.0, -1.0])
S3 = np.array([[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def triple():
    """Real d=2 ensemble (I, diag(1,-1), swap)."""
    return Ensemble(np.stack([S1, S2, S3]))


@pytest.fixture
def deficient_pair():
    return Ensemble(np.stack([S1, S2]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_herm(rng, d):
    G = crandn(rng, d, d)
    return (G + G.conj().T) / 2


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
