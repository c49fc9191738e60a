"""Query patterns, matching orders, and symmetry-breaking restrictions.

A query is a small connected undirected simple graph (2..8 vertices).  The
scheduler picks a matching order: a permutation of query vertices where
every vertex after the first has at least one earlier neighbor, so each
loop of the compiled plan can narrow its candidates with at least one
intersection.

Orders are ranked by a per-position score that rewards backward edges to
early positions: with n vertices and 1-based positions, a backward neighbor
at position j contributes 2^(n-j) to the score of the later vertex.  Orders
compare lexicographically on their score vectors, highest first, which
prefers plans that filter as early as possible.  The same scoring ranks the
alternative restriction sets.

Restrictions break automorphisms: for each match, exactly one permutation
of it under the query's automorphism group satisfies all (smaller, larger)
id checks, so enumerating with restrictions yields exactly one canonical
match per subgraph.  Sets are generated from the automorphism group with a
stabilizer chain: pick an orbit, force one member to hold the minimum id of
the orbit, recurse on the stabilizer.  Varying which member is forced
yields the alternative sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations
from typing import Iterator, Sequence

MAX_QUERY_VERTICES = 8

# Alternative restriction sets explored per query; orbit-anchor variation is
# factorial on fully symmetric queries, so the walk is capped (deterministic,
# depth-first in ascending anchor order).
MAX_RESTRICTION_SETS = 20000


class QueryParseError(ValueError):
    pass


@dataclass(frozen=True)
class QueryGraph:
    """Connected simple graph on [0, n), adjacency as row bitmasks."""

    vertex_count: int
    adj_bits: tuple[int, ...]

    @staticmethod
    def from_edges(n: int, edges: Sequence[tuple[int, int]]) -> "QueryGraph":
        if n < 2 or n > MAX_QUERY_VERTICES:
            raise QueryParseError(
                f"query must have 2..{MAX_QUERY_VERTICES} vertices, got {n}"
            )
        bits = [0] * n
        for u, v in edges:
            if u < 0 or v < 0 or u >= n or v >= n:
                raise QueryParseError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise QueryParseError(f"self loop on vertex {u}")
            bits[u] |= 1 << v
            bits[v] |= 1 << u
        q = QueryGraph(vertex_count=n, adj_bits=tuple(bits))
        if not q.is_connected():
            raise QueryParseError("query graph must be connected")
        return q

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj_bits[i] >> j & 1)

    def degree(self, i: int) -> int:
        return bin(self.adj_bits[i]).count("1")

    def neighbors(self, i: int) -> tuple[int, ...]:
        row = self.adj_bits[i]
        return tuple(j for j in range(self.vertex_count) if row >> j & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [
            (i, j)
            for i in range(self.vertex_count)
            for j in range(i + 1, self.vertex_count)
            if self.has_edge(i, j)
        ]

    def is_connected(self) -> bool:
        seen = 1
        frontier = [0]
        while frontier:
            u = frontier.pop()
            row = self.adj_bits[u]
            for v in range(self.vertex_count):
                if row >> v & 1 and not seen >> v & 1:
                    seen |= 1 << v
                    frontier.append(v)
        return seen == (1 << self.vertex_count) - 1


def parse_query(text: str) -> QueryGraph:
    """Parse a query from either of the two text forms.

    Form A: first line is n, each further non-empty line one edge "i j".
    Form B: a single line holding the row-major n*n adjacency matrix as a
    0/1 bitstring (length must be a perfect square).
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and ln[0] not in "#%"]
    if not lines:
        raise QueryParseError("empty query text")
    if len(lines) == 1 and set(lines[0]) <= {"0", "1"} and len(lines[0]) > 1:
        return _parse_bitstring(lines[0])
    try:
        n = int(lines[0])
    except ValueError:
        raise QueryParseError(f"expected vertex count on first line, got {lines[0]!r}") from None
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise QueryParseError(f"expected edge 'i j', got {ln!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise QueryParseError(f"non-integer edge tokens in {ln!r}") from None
    return QueryGraph.from_edges(n, edges)


def _parse_bitstring(s: str) -> QueryGraph:
    n = int(round(len(s) ** 0.5))
    if n * n != len(s):
        raise QueryParseError(f"bitstring length {len(s)} is not a perfect square")
    edges = []
    for i in range(n):
        for j in range(n):
            if s[i * n + j] == "1":
                if i == j:
                    raise QueryParseError(f"self loop on vertex {i} in bitstring")
                if s[j * n + i] != "1":
                    raise QueryParseError("adjacency bitstring must be symmetric")
                if i < j:
                    edges.append((i, j))
    return QueryGraph.from_edges(n, edges)


# ---------------------------------------------------------------------------
# matching orders and scores


def connected_orderings(q: QueryGraph) -> Iterator[tuple[int, ...]]:
    """All vertex orders where each vertex after the first has an earlier
    neighbor.  Emitted in lexicographic order of the vertex sequence."""
    n = q.vertex_count
    order: list[int] = []
    used = 0

    def extend() -> Iterator[tuple[int, ...]]:
        if len(order) == n:
            yield tuple(order)
            return
        for v in range(n):
            if used >> v & 1:
                continue
            if order and not (q.adj_bits[v] & used):
                continue
            order.append(v)
            _mark(v)
            yield from extend()
            order.pop()
            _unmark(v)

    def _mark(v: int) -> None:
        nonlocal used
        used |= 1 << v

    def _unmark(v: int) -> None:
        nonlocal used
        used &= ~(1 << v)

    yield from extend()


def backward_neighbors(q: QueryGraph, order: Sequence[int], i: int) -> set[int]:
    """Positions j < i whose order[j] is adjacent to order[i].  0-based."""
    row = q.adj_bits[order[i]]
    return {j for j in range(i) if row >> order[j] & 1}


def _scores_from_backward(n: int, backward: Sequence[Sequence[int]]) -> tuple[int, ...]:
    # 1-based backward position j contributes 2^(n-j); with 0-based j that
    # is 2^(n-1-j).
    return tuple(
        sum(1 << (n - 1 - j) for j in backward[i]) for i in range(n)
    )


def position_scores(q: QueryGraph, order: Sequence[int]) -> tuple[int, ...]:
    n = q.vertex_count
    return _scores_from_backward(
        n, [sorted(backward_neighbors(q, order, i)) for i in range(n)]
    )


def restriction_scores(n: int, pairs: Sequence[tuple[int, int]]) -> tuple[int, ...]:
    """Score vector of a restriction set, treating checks as undirected
    edges between positions."""
    backward: list[list[int]] = [[] for _ in range(n)]
    for a, b in pairs:
        lo, hi = min(a, b), max(a, b)
        backward[hi].append(lo)
    return _scores_from_backward(n, backward)


@dataclass(frozen=True)
class VertexScore:
    position: int
    score: int


@dataclass(frozen=True)
class Schedule:
    """A matching order plus the symmetry-breaking checks to run under it.

    ``restrictions`` holds (smaller, larger) position pairs: the data vertex
    matched at the first position must have a smaller id than the one at the
    second.  ``scores`` is the order's ranking vector, kept for diagnostics.
    """

    order: tuple[int, ...]
    restrictions: tuple[tuple[int, int], ...]
    variant: str = "edge"
    scores: tuple[int, ...] = ()

    def vertex_scores(self) -> tuple[VertexScore, ...]:
        return tuple(VertexScore(i, s) for i, s in enumerate(self.scores))


# ---------------------------------------------------------------------------
# automorphisms and restriction sets


def automorphism_group(q: QueryGraph) -> list[tuple[int, ...]]:
    """All adjacency-preserving vertex permutations, by brute force (n <= 8)."""
    n = q.vertex_count
    degs = [q.degree(i) for i in range(n)]
    auts = []
    for perm in permutations(range(n)):
        ok = True
        for i in range(n):
            if degs[perm[i]] != degs[i]:
                ok = False
                break
            row = q.adj_bits[i]
            for j in range(i + 1, n):
                if bool(row >> j & 1) != q.has_edge(perm[i], perm[j]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            auts.append(perm)
    return auts


def _position_group(q: QueryGraph, order: Sequence[int]) -> list[tuple[int, ...]]:
    """The automorphism group transported to order positions."""
    inv = {v: p for p, v in enumerate(order)}
    group = {
        tuple(inv[gamma[order[p]]] for p in range(q.vertex_count))
        for gamma in automorphism_group(q)
    }
    return sorted(group)


def _transitive_reduction(n: int, pairs: frozenset[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    reach = [[False] * n for _ in range(n)]
    for a, b in pairs:
        reach[a][b] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    reduced = []
    for a, b in pairs:
        if not any(reach[a][m] and reach[m][b] for m in range(n)):
            reduced.append((a, b))
    return tuple(sorted(reduced))


def generate_restrictions(
    q: QueryGraph, order: Sequence[int]
) -> list[tuple[tuple[int, int], ...]]:
    """Alternative valid restriction sets for the given order.

    Each returned set is transitively reduced and sorted.  Validity means:
    for any injective id assignment to positions, exactly one member of its
    orbit under the (position-transported) automorphism group satisfies
    every check.  That follows from the stabilizer-chain construction; the
    test suite additionally verifies it exhaustively.
    """
    n = q.vertex_count
    group = _position_group(q, order)
    if len(group) == 1:
        return [()]

    results: list[tuple[tuple[int, int], ...]] = []
    seen: set[frozenset[tuple[int, int]]] = set()

    def expand(subgroup: list[tuple[int, ...]], pairs: list[tuple[int, int]]) -> None:
        if len(results) >= MAX_RESTRICTION_SETS:
            return
        if len(subgroup) == 1:
            key = frozenset(pairs)
            if key not in seen:
                seen.add(key)
                results.append(_transitive_reduction(n, key))
            return
        # smallest position moved by the remaining symmetry
        p = next(
            p for p in range(n) if any(gamma[p] != p for gamma in subgroup)
        )
        orbit = sorted({gamma[p] for gamma in subgroup})
        for anchor in orbit:
            # force the anchor to hold the orbit's minimum id
            added = [(anchor, r) for r in orbit if r != anchor]
            stab = [gamma for gamma in subgroup if gamma[anchor] == anchor]
            expand(stab, pairs + added)
            if len(results) >= MAX_RESTRICTION_SETS:
                return

    expand(group, [])
    return results


def verify_restrictions(
    q: QueryGraph, order: Sequence[int], pairs: Sequence[tuple[int, int]]
) -> bool:
    """Exhaustively check the exactly-one-per-orbit property.

    Assignments are all permutations of {0..n-1} over positions; orbits are
    the left cosets of the position group.  Exponential in n, so this is a
    test/debug facility, not part of planning.
    """
    n = q.vertex_count
    group = _position_group(q, order)
    tallies: dict[tuple[int, ...], int] = {}
    for assign in permutations(range(n)):
        coset = min(
            tuple(assign[gamma[p]] for p in range(n)) for gamma in group
        )
        ok = all(assign[a] < assign[b] for a, b in pairs)
        tallies[coset] = tallies.get(coset, 0) + (1 if ok else 0)
    return all(v == 1 for v in tallies.values())


# ---------------------------------------------------------------------------
# schedule construction


def build_schedule(q: QueryGraph, variant: str = "edge") -> Schedule:
    """Pick the top-ranked connected order, then the top-ranked restriction
    set for it.  Ties break to the lexicographically smallest candidate, so
    the result is deterministic."""
    if variant not in ("edge", "vertex"):
        raise ValueError(f"variant must be 'edge' or 'vertex', got {variant!r}")
    best_order: tuple[int, ...] | None = None
    best_scores: tuple[int, ...] = ()
    for order in connected_orderings(q):
        scores = position_scores(q, order)
        if best_order is None or scores > best_scores:
            best_order, best_scores = order, scores
    assert best_order is not None  # connected graphs always have an ordering

    alternatives = generate_restrictions(q, best_order)
    best_set: tuple[tuple[int, int], ...] | None = None
    best_rscores: tuple[int, ...] = ()
    for cand in alternatives:
        rscores = restriction_scores(q.vertex_count, cand)
        key_better = best_set is None or rscores > best_rscores
        if not key_better and rscores == best_rscores and sorted(cand) < sorted(best_set):
            key_better = True
        if key_better:
            best_set, best_rscores = cand, rscores
    assert best_set is not None
    return Schedule(
        order=best_order,
        restrictions=tuple(sorted(best_set)),
        variant=variant,
        scores=best_scores,
    )


def schedule_to_json(s: Schedule) -> str:
    doc = {
        "order": list(s.order),
        "restrictions": [list(p) for p in s.restrictions],
        "variant": s.variant,
        "scores": [
            {"position": i, "score": sc} for i, sc in enumerate(s.scores)
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2)
