from fractions import Fraction

import pytest

from ksdioph import create_field

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def field_q():
    return create_field([-3, 1])


@pytest.fixture(scope="session")
def field_sqrt2():
    return create_field([-2, 0, 1])


@pytest.fixture(scope="session")
def field_sqrt5():
    return create_field([-5, 0, 1],
                        integral_basis=[[1, 0], [Fraction(1, 2), Fraction(1, 2)]])


@pytest.fixture(scope="session")
def field_golden():
    return create_field([-1, -1, 1])


def record_acceptance(line):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
