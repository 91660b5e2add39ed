import random

import pytest

from scl_forge.marking import Marking


@pytest.fixture
def rng():
    return random.Random(20261016)


@pytest.fixture
def F2():
    return Marking.ordinary_pair(2)


@pytest.fixture
def full():
    return Marking.full_abelianization(2)


@pytest.fixture
def half():
    # a -> 1, b -> 0: N is the normal closure of b
    return Marking(2, ((1, 0),))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
