"""Immutable in-memory data graphs in CSR form.

The enumeration engine treats the data graph as an undirected, unlabeled
simple graph stored as two flat arrays: an offset array of length
``vertex_count + 1`` and a concatenated neighbor array where the slice
``neighbors[offsets[u]:offsets[u+1]]`` holds the adjacency list of ``u``
sorted strictly ascending.  Sortedness is what makes the merge-based set
kernels in :mod:`subenum.kernels` correct, so it is enforced here once at
build time.

Input edge lists may use arbitrary non-negative vertex ids; ``build_csr``
reindexes them onto a dense ``[0, n)`` range while preserving the relative
order of the original ids, drops self loops, and collapses duplicate edges.
A vertex that appears only as a self-loop endpoint is retained with an
empty adjacency list.
"""

from __future__ import annotations

import struct
import weakref
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

OFFSET_DTYPE = np.int64
VERTEX_DTYPE = np.int32

SNAPSHOT_MAGIC = b"CSRG"
SNAPSHOT_VERSION = 1


class EdgeListParseError(ValueError):
    """Raised for malformed edge-list text; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class SnapshotFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CsrGraph:
    """Undirected simple graph, dense ids, sorted CSR adjacency."""

    vertex_count: int
    edge_count: int
    offsets: np.ndarray  # int64, len == vertex_count + 1
    neighbors: np.ndarray  # int32, len == 2 * edge_count

    def neighbors_of(self, u: int) -> np.ndarray:
        """Zero-copy view of the sorted adjacency list of ``u``."""
        if u < 0 or u >= self.vertex_count:
            raise IndexError(f"vertex {u} out of range [0, {self.vertex_count})")
        return self.neighbors[self.offsets[u]:self.offsets[u + 1]]

    def degree(self, u: int) -> int:
        if u < 0 or u >= self.vertex_count:
            raise IndexError(f"vertex {u} out of range [0, {self.vertex_count})")
        return int(self.offsets[u + 1] - self.offsets[u])

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def nbytes(self) -> int:
        return int(self.offsets.nbytes + self.neighbors.nbytes)

    def edge_list(self) -> list[tuple[int, int]]:
        """Each undirected edge once, as (u, v) with u < v."""
        out = []
        for u in range(self.vertex_count):
            for v in self.neighbors_of(u):
                if u < v:
                    out.append((u, int(v)))
        return out

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors_of(u)
        i = np.searchsorted(row, v)
        return bool(i < len(row) and row[i] == v)


@dataclass(frozen=True)
class GraphStats:
    """Global statistics consumed by the runtime cost model.

    ``p1`` is the probability that a uniformly random ordered vertex pair is
    an edge, 2|E| / |V|^2.  ``p2`` estimates the probability that a wedge
    closes into a triangle: triangles * |V| / (2|E|)^2.  ``p2`` can exceed 1
    on tiny dense graphs; consumers clamp it at the point of use.
    """

    vertex_count: int
    edge_count: int
    triangle_count: int
    max_degree: int
    p1: float
    p2: float


def neighbors(g: CsrGraph, u: int) -> np.ndarray:
    """Module-level alias for :meth:`CsrGraph.neighbors_of`."""
    return g.neighbors_of(u)


def parse_edge_list(text: str | bytes | Iterable[str]) -> list[tuple[int, int]]:
    """Parse whitespace-separated edge pairs, one per line.

    Lines that are blank or start with ``#`` or ``%`` are comments.  Every
    other line must contain exactly two non-negative integer tokens.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines() if isinstance(text, str) else text
    edges: list[tuple[int, int]] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListParseError(
                line_no, f"expected two integer tokens, got {len(parts)}"
            )
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListParseError(line_no, f"non-integer token in {parts!r}") from None
        if u < 0 or v < 0:
            raise EdgeListParseError(line_no, f"negative vertex id in ({u}, {v})")
        edges.append((u, v))
    return edges


def build_csr(edges: Sequence[tuple[int, int]]) -> CsrGraph:
    """Build a normalized CSR graph from raw (possibly messy) edge pairs.

    The vertex universe is the set of ids appearing as endpoints, including
    endpoints of self loops.  Self loops are then dropped and duplicate
    edges collapsed; each surviving edge is stored in both directions.
    """
    if len(edges) == 0:
        return CsrGraph(
            vertex_count=0,
            edge_count=0,
            offsets=np.zeros(1, dtype=OFFSET_DTYPE),
            neighbors=np.zeros(0, dtype=VERTEX_DTYPE),
        )
    raw = np.asarray(edges, dtype=np.int64)
    if raw.ndim != 2 or raw.shape[1] != 2:
        raise ValueError("edges must be a sequence of (u, v) pairs")
    if raw.min() < 0:
        raise ValueError("vertex ids must be non-negative")

    # Dense reindex: sorted unique original ids map to 0..n-1, so the
    # relative order of the original ids is preserved.
    ids = np.unique(raw)
    n = int(len(ids))
    u = np.searchsorted(ids, raw[:, 0])
    v = np.searchsorted(ids, raw[:, 1])

    keep = u != v  # drop self loops after the universe is fixed
    u, v = u[keep], v[keep]
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    enc = np.unique(src * np.int64(n) + dst)  # dedup + sort by (src, dst)
    src = (enc // n).astype(np.int64)
    dst = (enc % n).astype(VERTEX_DTYPE)

    offsets = np.zeros(n + 1, dtype=OFFSET_DTYPE)
    np.add.at(offsets, src + 1, 1)
    np.cumsum(offsets, out=offsets)
    return CsrGraph(
        vertex_count=n,
        edge_count=int(len(enc)) // 2,
        offsets=offsets,
        neighbors=dst,
    )


def triangle_count(g: CsrGraph) -> int:
    """Count unordered triangles by merging adjacency lists per edge.

    For every edge (u, v) with u < v, common neighbors w > v are counted,
    so each triangle contributes exactly once.
    """
    from .kernels import intersect_counts

    total = 0
    offs, nbrs = g.offsets, g.neighbors
    for u in range(g.vertex_count):
        row_u = nbrs[offs[u]:offs[u + 1]]
        # neighbors v > u give each undirected edge once
        start = np.searchsorted(row_u, u, side="right")
        for v in row_u[start:]:
            row_v = nbrs[offs[v]:offs[v + 1]]
            common, _, _, _ = intersect_counts(row_u, row_v)
            total += int(len(common) - np.searchsorted(common, v, side="right"))
    return total


_stats_cache: "weakref.WeakKeyDictionary[CsrGraph, GraphStats]" = weakref.WeakKeyDictionary()


def graph_stats(g: CsrGraph) -> GraphStats:
    """Compute (and cache per graph object) the statistics bundle."""
    cached = _stats_cache.get(g)
    if cached is not None:
        return cached
    n, m = g.vertex_count, g.edge_count
    tri = triangle_count(g)
    max_deg = int(g.degrees().max()) if n else 0
    p1 = (2.0 * m) / (n * n) if n else 0.0
    p2 = (tri * n) / float((2 * m) ** 2) if m else 0.0
    stats = GraphStats(
        vertex_count=n,
        edge_count=m,
        triangle_count=tri,
        max_degree=max_deg,
        p1=p1,
        p2=p2,
    )
    _stats_cache[g] = stats
    return stats


def save_snapshot(g: CsrGraph, path: str) -> None:
    """Write the binary snapshot.

    Layout, all little-endian:
      magic ``CSRG`` (4 bytes), version u32, vertex_count u64, edge_count u64,
      offsets as u64 * (vertex_count + 1), neighbors as u32 * (2 * edge_count).
    """
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<I", SNAPSHOT_VERSION))
        fh.write(struct.pack("<QQ", g.vertex_count, g.edge_count))
        fh.write(g.offsets.astype("<u8").tobytes())
        fh.write(g.neighbors.astype("<u4").tobytes())


def load_snapshot(path: str) -> CsrGraph:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != SNAPSHOT_MAGIC:
        raise SnapshotFormatError("bad magic; not a CSR snapshot")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != SNAPSHOT_VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    n, m = struct.unpack_from("<QQ", blob, 8)
    header = 24
    off_bytes = 8 * (n + 1)
    nbr_bytes = 4 * (2 * m)
    if len(blob) != header + off_bytes + nbr_bytes:
        raise SnapshotFormatError(
            f"size mismatch: expected {header + off_bytes + nbr_bytes} bytes, got {len(blob)}"
        )
    offsets = np.frombuffer(blob, dtype="<u8", count=n + 1, offset=header).astype(OFFSET_DTYPE)
    neighbors = np.frombuffer(
        blob, dtype="<u4", count=2 * m, offset=header + off_bytes
    ).astype(VERTEX_DTYPE)
    g = CsrGraph(vertex_count=int(n), edge_count=int(m), offsets=offsets, neighbors=neighbors)
    _validate_csr(g)
    return g


def load_graph(path: str) -> CsrGraph:
    """Load either snapshot or edge-list text, sniffing the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == SNAPSHOT_MAGIC:
        return load_snapshot(path)
    with open(path, "rb") as fh:
        return build_csr(parse_edge_list(fh.read()))


def _validate_csr(g: CsrGraph) -> None:
    if len(g.offsets) != g.vertex_count + 1 or g.offsets[0] != 0:
        raise SnapshotFormatError("corrupt offsets")
    if np.any(np.diff(g.offsets) < 0) or g.offsets[-1] != len(g.neighbors):
        raise SnapshotFormatError("offsets not monotone / neighbor length mismatch")
    for u in range(g.vertex_count):
        row = g.neighbors_of(u)
        if len(row) > 1 and np.any(np.diff(row) <= 0):
            raise SnapshotFormatError(f"adjacency of {u} not strictly ascending")


def structurally_equal(a: CsrGraph, b: CsrGraph) -> bool:
    return (
        a.vertex_count == b.vertex_count
        and a.edge_count == b.edge_count
        and np.array_equal(a.offsets, b.offsets)
        and np.array_equal(a.neighbors, b.neighbors)
    )
