"""Seeded synthetic graph generators for tests, benchmarks, and the CLI."""

from __future__ import annotations

import numpy as np


def erdos_renyi(n: int, p: float, seed: int) -> list[tuple[int, int]]:
    """G(n, p): each of the n*(n-1)/2 pairs is an edge with probability p.

    Sampled row by row, so memory stays O(n) per row; intended for modest n
    (up to a few thousand).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    for u in range(n - 1):
        draws = rng.random(n - u - 1)
        for k in np.nonzero(draws < p)[0]:
            edges.append((u, u + 1 + int(k)))
    return edges


def powerlaw(n: int, m: int, seed: int) -> list[tuple[int, int]]:
    """Preferential attachment: each new vertex attaches m edges to existing
    vertices chosen proportionally to their current degree.

    Vertices 0..m-1 seed the process; vertex m connects to all of them, and
    every later vertex samples m distinct targets from the degree-weighted
    pool.  The result is connected with a heavy-tailed degree distribution.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if n <= m:
        raise ValueError(f"n must exceed m (got n={n}, m={m})")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    # every endpoint appended once per incident edge -> degree-weighted pool
    pool: list[int] = []
    for t in range(m):
        edges.append((m, t))
        pool.extend((m, t))
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(pool[int(rng.integers(len(pool)))])
        for t in targets:
            edges.append((v, t))
            pool.extend((v, t))
    return edges


def clique(n: int) -> list[tuple[int, int]]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def generate(kind: str, n: int, seed: int, p: float = 0.1, m: int = 4) -> list[tuple[int, int]]:
    if kind == "er":
        return erdos_renyi(n, p, seed)
    if kind == "powerlaw":
        return powerlaw(n, m, seed)
    if kind == "clique":
        return clique(n)
    raise ValueError(f"unknown generator kind {kind!r}")
