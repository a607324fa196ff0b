"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from wlkit.graphs import (
    Graph,
    Permutation,
    build_graph,
    complete_bipartite_graph,
    complete_graph,
    cycle_graph,
    disjoint_union,
    path_graph,
    prism_graph,
    star_graph,
)

# Pass/fail lines for the acceptance criteria, printed in the summary.
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


def random_graph(rng: np.random.Generator, n: int, p: float = 0.4) -> Graph:
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
    ]
    return build_graph(n, edges)


def random_tree(rng: np.random.Generator, n: int) -> Graph:
    edges = [(int(rng.integers(0, v)), v) for v in range(1, n)]
    return build_graph(n, edges)


def random_permutation(rng: np.random.Generator, n: int) -> Permutation:
    return Permutation(tuple(int(x) for x in rng.permutation(n)))


@pytest.fixture
def c6() -> Graph:
    return cycle_graph(6)


@pytest.fixture
def two_c3() -> Graph:
    union, _ = disjoint_union(cycle_graph(3), cycle_graph(3))
    return union


@pytest.fixture
def k33() -> Graph:
    return complete_bipartite_graph(3, 3)


@pytest.fixture
def prism() -> Graph:
    return prism_graph()


def graph_zoo() -> dict[str, Graph]:
    """Small named graphs used across the suite."""
    zoo = {
        "K1": complete_graph(1),
        "K2": complete_graph(2),
        "K3": complete_graph(3),
        "K4": complete_graph(4),
        "P2": path_graph(2),
        "P3": path_graph(3),
        "P4": path_graph(4),
        "P5": path_graph(5),
        "C3": cycle_graph(3),
        "C4": cycle_graph(4),
        "C5": cycle_graph(5),
        "C6": cycle_graph(6),
        "S3": star_graph(3),
        "K33": complete_bipartite_graph(3, 3),
        "prism": prism_graph(),
    }
    zoo["2C3"], _ = disjoint_union(zoo["C3"], zoo["C3"])
    return zoo
