import numpy as np
import pytest

from gdnlslab.grid import Field, Grid1D


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def gaussian_field(n=256, length=40.0, amp=1.0, a=1.0, t=0.0, shift=0.0):
    g = Grid1D(n, length)
    return Field(g, t, amp * np.exp(-a * (g.x - shift) ** 2))


def random_field(rng, n=128, length=2 * np.pi):
    g = Grid1D(n, length)
    return Field(g, 0.0, rng.normal(size=n) + 1j * rng.normal(size=n))


# one summary line per acceptance criterion, filled by test_acceptance
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
