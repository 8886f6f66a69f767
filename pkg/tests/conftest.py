from functools import lru_cache

import pytest


def brute_partitions(n, m, b=None):
    """All partitions of n into at most m parts, each at most b (ascending-part recursion)."""
    b = n if b is None else b
    out = []

    def rec(rest, smallest, acc):
        if rest == 0:
            if len(acc) <= m:
                out.append(tuple(sorted(acc, reverse=True)))
            return
        if len(acc) == m:
            return
        for p in range(smallest, min(rest, b) + 1):
            rec(rest - p, p, acc + [p])

    rec(n, 1, [])
    return out


@lru_cache(maxsize=None)
def recurrence_bounded(n, m, b):
    """B(n, m, b) from the split on whether a part equal to b is used."""
    if n == 0:
        return 1
    if m == 0 or b == 0:
        return 0
    if b > n:
        return recurrence_bounded(n, m, n)
    return recurrence_bounded(n, m, b - 1) + recurrence_bounded(n - b, m - 1, b)


@pytest.fixture(scope="session")
def brute():
    return brute_partitions


# Filled by tests/test_acceptance.py; one line per exit criterion.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
