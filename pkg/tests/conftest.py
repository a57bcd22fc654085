import itertools

import numpy as np
import pytest


def brute_energies(s):
    """Reference enumeration over sign tuples, independent of the library's table builder."""
    out = {}
    for sigma in itertools.product((1, -1), repeat=len(s)):
        e = sum(v * g for v, g in zip(s, sigma))
        out[e] = out.get(e, 0) + 1
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the lines are repeated in the terminal summary."""

    def record(label: str, passed: bool, detail: str) -> bool:
        line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
