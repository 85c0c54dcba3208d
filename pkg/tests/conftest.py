import math

import pytest

from rbar.frequency import FrequencyContext

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def ctx1():
    return FrequencyContext.from_pairs([("one", 1.0)])


@pytest.fixture
def ctx2():
    return FrequencyContext.from_pairs([("one", 1.0), ("sqrt2", math.sqrt(2.0))])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
