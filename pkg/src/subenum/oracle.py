"""Brute-force match reference, independent of the planner and engine.

This module exists to check the engine, so it shares none of its machinery:
no matching orders, no restrictions, no sorted-set kernels.  It walks query
vertices in index order 0..n-1 and tries every injective assignment of data
vertices, testing constraints pairwise with bitmask adjacency.

Edge-induced semantics: every query edge must map to a data edge (injective
homomorphism).  Vertex-induced additionally requires every query non-edge
to map to a data non-edge.

A raw match is one assignment; unique matches group raw matches that cover
the same subgraph, i.e. the same vertex set plus (edge-induced) the same
set of covered data edges.  Every such group has exactly |Aut(q)| members.
"""

from __future__ import annotations

from dataclasses import dataclass

from .csr import CsrGraph
from .query import QueryGraph

MAX_ORACLE_VERTICES = 14


@dataclass(frozen=True)
class MatchRecord:
    """One raw match; assignment[i] is the data vertex for query vertex i."""

    assignment: tuple[int, ...]


def _data_bits(g: CsrGraph) -> list[int]:
    rows = []
    for u in range(g.vertex_count):
        row = 0
        for v in g.neighbors_of(u):
            row |= 1 << int(v)
        rows.append(row)
    return rows


def enumerate_all(q: QueryGraph, g: CsrGraph, variant: str = "edge") -> list[MatchRecord]:
    """All raw matches, in lexicographic assignment order."""
    if variant not in ("edge", "vertex"):
        raise ValueError(f"variant must be 'edge' or 'vertex', got {variant!r}")
    if g.vertex_count > MAX_ORACLE_VERTICES:
        raise ValueError(
            f"oracle refuses graphs with more than {MAX_ORACLE_VERTICES} vertices "
            f"(got {g.vertex_count})"
        )
    n = q.vertex_count
    if g.vertex_count < n:
        return []
    gbits = _data_bits(g)
    vertex_induced = variant == "vertex"
    out: list[MatchRecord] = []
    assign = [0] * n

    def extend(t: int, used: int) -> None:
        if t == n:
            out.append(MatchRecord(tuple(assign)))
            return
        qrow = q.adj_bits[t]
        for v in range(g.vertex_count):
            if used >> v & 1:
                continue
            ok = True
            for j in range(t):
                mapped_adjacent = bool(gbits[assign[j]] >> v & 1)
                if qrow >> j & 1:
                    if not mapped_adjacent:
                        ok = False
                        break
                elif vertex_induced and mapped_adjacent:
                    ok = False
                    break
            if ok:
                assign[t] = v
                extend(t + 1, used | 1 << v)

    extend(0, 0)
    return out


def _unique_key(q: QueryGraph, rec: MatchRecord, variant: str):
    verts = frozenset(rec.assignment)
    if variant == "vertex":
        # induced subgraphs are determined by their vertex set
        return verts
    covered = frozenset(
        (min(rec.assignment[i], rec.assignment[j]), max(rec.assignment[i], rec.assignment[j]))
        for i, j in q.edges()
    )
    return (verts, covered)


def count_unique(q: QueryGraph, g: CsrGraph, variant: str = "edge") -> int:
    """Number of distinct matched subgraphs (one per automorphism class)."""
    matches = enumerate_all(q, g, variant)
    return len({_unique_key(q, rec, variant) for rec in matches})
