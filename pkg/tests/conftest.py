import numpy as np
import pytest

from todacurve import CurveState, generate_curve, hexagon

SQ3_2 = np.sqrt(3.0) / 2.0

_acceptance_lines = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hex_curve():
    return hexagon()


@pytest.fixture
def random_curves():
    def make(n, count, start=0):
        return [generate_curve(n, seed) for seed in range(start, start + count)]
    return make


@pytest.fixture
def report():
    """Record one acceptance line: ``report(number, title, passed, detail)``."""
    def record(number, title, passed, detail=""):
        _acceptance_lines.append((number, title, passed, detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_acceptance_lines, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {title}  {detail}")
