import sys

import pytest

from pmult.core import PrimeSet
from pmult.general import build_levels, construct_general
from pmult.small import construct_p23, construct_p235


@pytest.fixture(scope="session")
def seq23():
    return construct_p23(60_000)


@pytest.fixture(scope="session")
def seq235():
    return construct_p235(1920 * 60)


@pytest.fixture(scope="session")
def levels235():
    return build_levels(PrimeSet((2, 3, 5)))


@pytest.fixture(scope="session")
def general235():
    return construct_general(PrimeSet((2, 3, 5)), 1920 * 30)


@pytest.fixture(scope="session")
def general357():
    return construct_general(PrimeSet((3, 5, 7)), 945 * 30)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
