import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def enumerate_matchings(n, edges):
    """Every matching of a small sparse graph as (cardinality, weight) pairs.

    Exhaustive recursion over left nodes; independent of the solver and the
    subset DP.
    """
    adj = {i: [] for i in range(n)}
    for i, j, w in edges:
        adj[i].append((j, w))
    out = []

    def rec(i, used, card, weight):
        if i == n:
            out.append((card, weight))
            return
        rec(i + 1, used, card, weight)
        for j, w in adj[i]:
            if j not in used:
                rec(i + 1, used | {j}, card + 1, weight + w)

    rec(0, frozenset(), 0, 0.0)
    return out


def permutation_optimum(weights):
    """Best perfect-matching weight by trying all n! permutations."""
    n = len(weights)
    return max(sum(weights[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


@pytest.fixture
def rng():
    return np.random.default_rng(20180809)
