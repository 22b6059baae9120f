import numpy as np
import pytest

from faircf.data import Dataset
from faircf.model import LogisticModel


@pytest.fixture
def threshold_model():
    """1-D logistic model that is, for practical purposes, the step at x = 0."""
    return LogisticModel([50.0], 0.0)


@pytest.fixture
def blobs():
    """Two unit-variance Gaussian clusters at (-2,-2) and (2,2), 200 samples."""
    rng = np.random.default_rng(11)
    X = np.vstack([rng.normal(-2, 1, (100, 2)), rng.normal(2, 1, (100, 2))])
    y = np.r_[np.zeros(100), np.ones(100)]
    g = np.tile([0, 1], 100)
    return Dataset(X, y, g)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def record(pytestconfig):
    """Log one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = pytestconfig.stash.setdefault(_ACCEPTANCE, [])

    def rec(name, ok, detail):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return ok

    return rec


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
