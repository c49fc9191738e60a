import random

import pytest

from subenum.csr import build_csr
from subenum.gen import erdos_renyi
from subenum.query import QueryGraph

QUERY_POOL = {
    "edge": [(0, 1)],
    "path3": [(0, 1), (1, 2)],
    "triangle": [(0, 1), (0, 2), (1, 2)],
    "path4": [(0, 1), (1, 2), (2, 3)],
    "star4": [(0, 1), (0, 2), (0, 3)],
    "cycle4": [(0, 1), (1, 2), (2, 3), (0, 3)],
    "diamond": [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)],
    "clique4": [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
    "tailed_triangle": [(0, 1), (0, 2), (1, 2), (2, 3)],
    "clique5": [(i, j) for i in range(5) for j in range(i + 1, 5)],
    "house": [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4)],
}


def pool_query(name: str) -> QueryGraph:
    edges = QUERY_POOL[name]
    n = max(max(e) for e in edges) + 1
    return QueryGraph.from_edges(n, edges)


def random_connected_query(rng: random.Random, n: int) -> QueryGraph:
    """Rejection-sample a connected query on n vertices."""
    while True:
        edges = [
            (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.6
        ]
        try:
            return QueryGraph.from_edges(n, edges)
        except ValueError:
            continue


def er_graph(n: int, p: float, seed: int):
    return build_csr(erdos_renyi(n, p, seed))


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
