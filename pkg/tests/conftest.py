import numpy as np
import pytest

from cloudassoc.gap import GapInstance

# one line per acceptance criterion, printed in the terminal summary
CRITERIA = []


def record_criterion(number, ok, detail):
    CRITERIA.append((number, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def i1():
    # C=2, U=3, K=[1,2], unit weights
    return GapInstance(np.array([[5, 3, 2], [4, 6, 1]]), np.ones((2, 3)), [1, 2])


@pytest.fixture
def p1():
    return GapInstance.unit([[5], [7]], 1)
