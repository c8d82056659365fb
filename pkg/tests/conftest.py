import numpy as np
import pytest

from negsurvey import TieBreakModel

ACCEPTANCE_LINES = []


def random_tie_table(t, rng):
    upper = rng.random((t, t))
    q = np.triu(upper, 1)
    q = q + np.tril(1.0 - q.T, -1)
    return TieBreakModel.custom(q)


def random_design_matrix(t, rng):
    p = np.zeros((t, t))
    for j in range(t):
        p[np.arange(t) != j, j] = rng.dirichlet(np.ones(t - 1))
    return p


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
