"""Shared fixtures: small deterministic graphs and node tables."""

import numpy as np
import pytest

from homophily.graph import from_edges, generate_pa_graph
from homophily.simgen import NodeTable


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def path_aab():
    """Path 0-1-2 with nodes 0, 1 in the group and node 2 outside it."""
    g = from_edges(3, [(0, 1), (1, 2)])
    y = np.array([1, 1, 0])
    nt = NodeTable(x=np.array([0.5, -0.3, 1.2]), z=np.zeros(3), y=y)
    return g, nt


@pytest.fixture
def star4():
    """Star with center 0 and leaves 1..3."""
    return from_edges(4, [(0, 1), (0, 2), (0, 3)])


@pytest.fixture(scope="session")
def medium_graph():
    """A moderately sized attachment graph shared across slow-ish tests."""
    return generate_pa_graph(600, 5, 0.8, np.random.default_rng(7))


def random_simple_graph(rng, n_max=12):
    """Random small simple graph with at least one edge."""
    n = int(rng.integers(3, n_max + 1))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    keep = rng.random(len(pairs)) < 0.4
    if not keep.any():
        keep[rng.integers(len(pairs))] = True
    edges = [p for p, k in zip(pairs, keep) if k]
    return from_edges(n, edges)
