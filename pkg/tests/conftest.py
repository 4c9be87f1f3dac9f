import os

import numpy as np
import pytest

from mesharc import RectDomain
from mesharc.assembly import PROBLEMS


ACCEPTANCE_LINES = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance: end-to-end reproduction of the reference tables"
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    # MESHARC_SEED only influences randomized property tests, never the solver
    return np.random.default_rng(int(os.environ.get("MESHARC_SEED", "0")))


@pytest.fixture(scope="session")
def square():
    return RectDomain(-1.0, 1.0, -1.0, 1.0)


@pytest.fixture(scope="session")
def helmholtz():
    return PROBLEMS["helmholtz_neumann"]


@pytest.fixture(scope="session")
def poisson():
    return PROBLEMS["poisson_dirichlet"]


def simpson(f, a, b, n=10000):
    """Composite Simpson rule, the 1-D reference oracle used in the tests."""
    x = np.linspace(a, b, 2 * n + 1)
    y = f(x)
    return (b - a) / (6 * n) * (y[0] + y[-1] + 4 * y[1::2].sum() + 2 * y[2:-1:2].sum())
