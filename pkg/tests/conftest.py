"""Brute-force graph oracles shared by the test modules."""

import itertools
from collections import Counter
from fractions import Fraction

import pytest

TILTS = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]


def connected(n, edges):
    adj = {v: [] for v in range(n)}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def connected_graphs(n):
    """Every labeled connected graph on n vertices, as a sorted edge tuple."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for mask in range(1 << len(pairs)):
        edges = tuple(pr for i, pr in enumerate(pairs) if mask >> i & 1)
        if connected(n, edges):
            out.append(edges)
    return out


def brute_counts(n):
    """Counter edge-count -> number of connected graphs on n vertices."""
    return Counter(len(e) for e in connected_graphs(n))


@pytest.fixture(scope="session")
def brute_tables():
    return {n: brute_counts(n) for n in range(1, 7)}


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
