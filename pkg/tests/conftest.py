import numpy as np
import pytest

from econn import structures


@pytest.fixture(scope="session")
def sasaki():
    return structures.sasakian_heisenberg(1)


@pytest.fixture(scope="session")
def conf1():
    return structures.conformal_hermitian_line(2, 1.0)


@pytest.fixture(scope="session")
def conf2():
    return structures.conformal_hermitian_line(2, 2.0)


@pytest.fixture(scope="session")
def kaehler3():
    return structures.kaehler_line_product(1, 1.0)


@pytest.fixture(scope="session")
def kaehler5():
    return structures.kaehler_line_product(2, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
