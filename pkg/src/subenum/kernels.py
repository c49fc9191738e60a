"""Sorted-set kernels with merge-exact scan accounting.

Every candidate-set and pruning operation in the engine reduces to ordered
intersection or subtraction of strictly-ascending int32 arrays.  The cost
model of interest is the classic two-pointer merge: both pointers advance
until one input is exhausted, an optional upper bound cuts the scan short,
and the number of elements consumed from each input is the work done.

The kernels here produce results and counters that are element-for-element
identical to that merge, but compute them with vectorized primitives.  This
is possible because for strictly sorted inputs the merge exit point has a
closed form: with t = min(max(a), max(b)), the merge consumes exactly the
elements <= t from each side (subtraction additionally flushes the tail of
the left input).  ``merge_reference`` is the literal pointer loop; the
engine's shadow mode cross-checks every call against it.

Counter conventions:
  * scanned(x)    -- elements consumed from input x, including a
                     subtraction's tail flush of the left input.
  * comparisons   -- merge loop iterations, i.e. element pairs examined:
                     consumed(a<=t) + consumed(b<=t) - |common prefix|.

A bound ``b`` restricts the operation to elements < b on both sides before
the merge runs, which models a bounded scan that terminates at the first
element >= b.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

VERTEX_DTYPE = np.int32

# Source tags for scan attribution.
SRC_ADJACENCY = "adjacency"
SRC_PREFIX = "prefix"
SRC_PRUNED = "pruned"

_EMPTY = np.zeros(0, dtype=VERTEX_DTYPE)


@dataclass
class OpCounters:
    """Scanned-element counters split by the source of each input."""

    scanned_adjacency: int = 0
    scanned_prefix: int = 0
    scanned_pruned: int = 0
    comparisons: int = 0

    def add_scan(self, src: str, amount: int) -> None:
        if src == SRC_ADJACENCY:
            self.scanned_adjacency += amount
        elif src == SRC_PREFIX:
            self.scanned_prefix += amount
        elif src == SRC_PRUNED:
            self.scanned_pruned += amount
        else:
            raise ValueError(f"unknown scan source {src!r}")

    def total_scanned(self) -> int:
        return self.scanned_adjacency + self.scanned_prefix + self.scanned_pruned

    def merge(self, other: "OpCounters") -> None:
        self.scanned_adjacency += other.scanned_adjacency
        self.scanned_prefix += other.scanned_prefix
        self.scanned_pruned += other.scanned_pruned
        self.comparisons += other.comparisons


def _truncate(x: np.ndarray, bound: int | None) -> np.ndarray:
    if bound is None:
        return x
    return x[: np.searchsorted(x, bound, side="left")]


def _membership(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean mask over ``a``: which elements also appear in ``b``."""
    idx = np.searchsorted(b, a)
    idx[idx == len(b)] = len(b) - 1  # b is non-empty at every call site
    return b[idx] == a


def intersect_counts(
    a: np.ndarray, b: np.ndarray, bound: int | None = None
) -> tuple[np.ndarray, int, int, int]:
    """Bounded sorted intersection.

    Returns (result, scanned_a, scanned_b, comparisons) with counters exactly
    matching the two-pointer merge over the bound-truncated inputs.
    """
    a2 = _truncate(a, bound)
    b2 = _truncate(b, bound)
    if len(a2) == 0 or len(b2) == 0:
        return _EMPTY, 0, 0, 0
    t = min(int(a2[-1]), int(b2[-1]))
    ia = int(np.searchsorted(a2, t, side="right"))
    jb = int(np.searchsorted(b2, t, side="right"))
    if len(a2) <= len(b2):
        out = a2[_membership(a2, b2)]
    else:
        out = b2[_membership(b2, a2)]
    m = len(out)
    return out, ia, jb, ia + jb - m


def subtract_counts(
    a: np.ndarray, b: np.ndarray, bound: int | None = None
) -> tuple[np.ndarray, int, int, int]:
    """Bounded sorted difference a \\ b.

    The left input is always fully consumed (the merge flushes its tail once
    the right side is exhausted); comparisons stop at the merge exit point.
    """
    a2 = _truncate(a, bound)
    b2 = _truncate(b, bound)
    if len(a2) == 0:
        return _EMPTY, 0, 0, 0
    if len(b2) == 0:
        return a2.copy(), len(a2), 0, 0
    t = min(int(a2[-1]), int(b2[-1]))
    ia = int(np.searchsorted(a2, t, side="right"))
    jb = int(np.searchsorted(b2, t, side="right"))
    in_b = _membership(a2, b2)
    out = a2[~in_b]
    m = int(in_b.sum())
    return out, len(a2), jb, ia + jb - m


def intersect(
    a: np.ndarray,
    b: np.ndarray,
    bound: int | None = None,
    counters: OpCounters | None = None,
    a_src: str = SRC_PREFIX,
    b_src: str = SRC_ADJACENCY,
) -> np.ndarray:
    out, sa, sb, comps = intersect_counts(a, b, bound)
    if counters is not None:
        counters.add_scan(a_src, sa)
        counters.add_scan(b_src, sb)
        counters.comparisons += comps
    return out

def subtract(
    a: np.ndarray,
    b: np.ndarray,
    bound: int | None = None,
    counters: OpCounters | None = None,
    a_src: str = SRC_PREFIX,
    b_src: str = SRC_ADJACENCY,
) -> np.ndarray:
    out, sa, sb, comps = subtract_counts(a, b, bound)
    if counters is not None:
        counters.add_scan(a_src, sa)
        counters.add_scan(b_src, sb)
        counters.comparisons += comps
    return out


def merge_reference(
    a, b, op: str, bound: int | None = None
) -> tuple[list[int], int, int, int]:
    """Literal two-pointer merge; the semantic definition of the counters.

    Kept deliberately naive.  Tests and the engine's shadow mode compare the
    vectorized kernels against this, which is what keeps the closed-form
    counter computation honest.
    """
    if op not in ("intersect", "subtract"):
        raise ValueError(f"unknown op {op!r}")
    out: list[int] = []
    i = j = 0
    sa = sb = comps = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = int(a[i]), int(b[j])
        # Either side reaching the bound ends the scan: every later match
        # would be >= bound and therefore outside the result.
        if bound is not None and (x >= bound or y >= bound):
            break
        comps += 1
        if x < y:
            if op == "subtract":
                out.append(x)
            i += 1
            sa += 1
        elif y < x:
            j += 1
            sb += 1
        else:
            if op == "intersect":
                out.append(x)
            i += 1
            j += 1
            sa += 1
            sb += 1
    if op == "subtract":
        # flush the remaining left tail (bounded: only elements < bound)
        while i < na:
            x = int(a[i])
            if bound is not None and x >= bound:
                break
            out.append(x)
            i += 1
            sa += 1
    return out, sa, sb, comps
