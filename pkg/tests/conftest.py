import numpy as np
import pytest

from nlslab.radial_transform import build_grid


@pytest.fixture(scope="session")
def grid4():
    """d = 4 grid used by most unit tests (K is about 100)."""
    return build_grid(4, 1024, 32.0)


@pytest.fixture(scope="session")
def grid3():
    return build_grid(3, 512, 24.0)


def gaussian(a=0.5):
    return lambda r: np.exp(-a * np.asarray(r) ** 2)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[number])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
