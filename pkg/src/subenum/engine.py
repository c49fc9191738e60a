"""Execute compiled plans over CSR graphs.

The driver runs the plan's nested loops by recursion: matching position p
materializes the slots and directive instances scheduled after loop p, then
iterates the next position's candidate slot between bisected restriction
bounds.  All mutable state lives in a per-worker context; arrays published
into a frame are never mutated afterwards, which is what makes handing a
frame snapshot to another worker safe.

Instrumentation counts every element a kernel consumes, attributed to the
operand's source: raw adjacency, materialized prefix arrays, or pruned
lists.  The batched directive builds reproduce the per-key two-pointer
counters exactly through the same closed forms the scalar kernels use, so
instrumented totals do not depend on the vectorization strategy.

Memory: pruned-list buffers come from a per-worker pool keyed by directive,
pre-sized to the degree sum of the selecting set and grown in powers of
two.  ``aux_bytes_peak_per_worker`` is the high-water mark of pool bytes a
single worker owned; buffers detached into child tasks stay charged to the
worker that allocated them.
"""

from __future__ import annotations

import json
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .csr import CsrGraph, graph_stats
from .kernels import intersect_counts, merge_reference, subtract_counts
from .plan import ADJ, AUX, INTERSECT, SLOT, QueryPlan

_ADJ_COL, _PREFIX_COL, _PRUNED_COL, _COMP_COL = 0, 1, 2, 3
_HIST_BUCKETS = 64


class EngineError(RuntimeError):
    pass


class SinkOverflow(EngineError):
    pass


class CountSink:
    """Accumulates only the match count."""

    wants_tuples = False

    def __init__(self) -> None:
        self.count = 0
        self._lock = threading.Lock()

    def add_bulk(self, n: int) -> None:
        with self._lock:
            self.count += n


class CollectSink:
    """Collects match tuples, one data-vertex id per matching position.

    ``cap`` bounds retained matches; exceeding it raises SinkOverflow.
    Collection order across workers is unspecified.
    """

    wants_tuples = True

    def __init__(self, cap: int | None = None) -> None:
        self.matches: list[tuple[int, ...]] = []
        self.cap = cap
        self._lock = threading.Lock()

    def emit(self, match: tuple[int, ...]) -> None:
        with self._lock:
            if self.cap is not None and len(self.matches) >= self.cap:
                raise SinkOverflow(f"collect sink cap {self.cap} exceeded")
            self.matches.append(match)

    def add_bulk(self, n: int) -> None:  # count fast path never fires here
        raise EngineError("collect sink cannot absorb bulk counts")


@dataclass
class ExecConfig:
    """Runtime knobs.  Defaults favor exact instrumentation over speed."""

    workers: int = 1
    nested: bool = False
    first_loop_chunk: int = 1
    nested_threshold: int = 512
    high_degree_threshold: float | None = None
    instrument: bool = True
    shadow: bool = False
    check_invariants: bool = False
    verify_chains: bool = False
    trace_hook: Callable[[int, int, int], None] | None = None


@dataclass(frozen=True)
class CostModelState:
    """Graph-bound constants for the online gate.

    ``factors[d]`` folds every compile-time multiplier of directive d's
    extension estimate into one float (p1/p2 per tag, |V| for loops with no
    materialized prefix); the runtime estimate only multiplies live slot
    sizes on top.  p2 can exceed 1 on degenerate graphs (one triangle, many
    isolated vertices), so it is clamped to 1 before folding.
    """

    p1: float
    p2: float
    vertex_count: int
    high_degree_threshold: float
    factors: tuple[float, ...]
    base_slots: tuple[tuple[int, ...], ...]


def bind_cost_model(plan: QueryPlan, graph: CsrGraph, config: ExecConfig) -> CostModelState:
    stats = graph_stats(graph)
    p2 = min(stats.p2, 1.0)
    thr = config.high_degree_threshold
    if thr is None:
        if graph.vertex_count:
            thr = max(64.0, graph.edge_count / graph.vertex_count * 8.0)
        else:
            thr = 64.0
    factors = []
    bases = []
    for d in plan.directives:
        f = 1.0
        bs = []
        for base_slot, tags in d.card_loops:
            for tag in tags:
                f *= stats.p1 if tag == "p1" else p2
            if base_slot is None:
                f *= graph.vertex_count
            else:
                bs.append(base_slot)
        factors.append(f)
        bases.append(tuple(bs))
    return CostModelState(
        p1=stats.p1,
        p2=p2,
        vertex_count=graph.vertex_count,
        high_degree_threshold=float(thr),
        factors=tuple(factors),
        base_slots=tuple(bases),
    )


def estimate_card(live_size: float, tags: tuple[str, ...], p1: float, p2: float) -> float:
    """Estimated candidate size for a target whose depth-h prefix has
    ``live_size`` elements: one p1/p2 factor per query edge into the
    unmatched range."""
    est = float(live_size)
    p2 = min(p2, 1.0)
    for tag in tags:
        est *= p1 if tag == "p1" else p2
    return est


def gain_formula(e_hat: float, deg_u: float, fil_live: float, vertex_count: int) -> float:
    """Expected benefit of pruning N(u) now: e_hat downstream reads each
    save (|N(u)| - expected surviving) scans, against one build costing
    |filtering| + |N(u)|.  Membership of N(u) in the filtering set is
    modeled as uniform over the vertex universe."""
    est_cap = fil_live * deg_u / max(vertex_count, 1)
    return e_hat * (deg_u - est_cap) - (fil_live + deg_u)


def estimate_gain(
    state: CostModelState,
    directive_id: int,
    deg_u: float,
    fil_live: float,
    sel_live: float,
    base_lives: tuple[float, ...],
) -> float:
    e_hat = state.factors[directive_id]
    for live in base_lives:
        e_hat *= live
    e_hat /= max(sel_live, 1.0)
    return gain_formula(e_hat, deg_u, fil_live, state.vertex_count)


@dataclass
class RunStats:
    match_count: int
    scanned_adjacency: int
    scanned_prefix: int
    scanned_pruned: int
    comparisons: int
    aux_bytes_peak_per_worker: int
    elapsed_seconds: float
    workers: int = 1
    strategy: str = "none"
    variant: str = "edge"
    per_slot: dict = field(default_factory=dict)
    degree_histogram: dict = field(default_factory=dict)
    chain_frames_verified: int = 0
    busy_seconds: tuple = ()

    def total_scanned(self) -> int:
        return self.scanned_adjacency + self.scanned_prefix + self.scanned_pruned

    def to_json(self) -> str:
        doc = {
            "match_count": self.match_count,
            "scanned_adjacency": self.scanned_adjacency,
            "scanned_prefix": self.scanned_prefix,
            "scanned_pruned": self.scanned_pruned,
            "comparisons": self.comparisons,
            "aux_bytes_peak_per_worker": self.aux_bytes_peak_per_worker,
            "elapsed_seconds": self.elapsed_seconds,
            "workers": self.workers,
            "strategy": self.strategy,
            "variant": self.variant,
            "per_slot": {str(k): v for k, v in sorted(self.per_slot.items())},
            "degree_histogram": {str(k): v for k, v in sorted(self.degree_histogram.items())},
            "chain_frames_verified": self.chain_frames_verified,
            "busy_seconds": list(self.busy_seconds),
        }
        return json.dumps(doc, sort_keys=True)


class _Counters:
    __slots__ = (
        "match_count", "scanned_adjacency", "scanned_prefix", "scanned_pruned",
        "comparisons", "per_slot", "degree_hist", "chain_frames",
        "aux_bytes", "aux_bytes_peak", "busy_seconds",
    )

    def __init__(self, num_slots: int) -> None:
        self.match_count = 0
        self.scanned_adjacency = 0
        self.scanned_prefix = 0
        self.scanned_pruned = 0
        self.comparisons = 0
        self.per_slot = np.zeros((num_slots, 4), dtype=np.int64)
        self.degree_hist = np.zeros(_HIST_BUCKETS, dtype=np.int64)
        self.chain_frames = 0
        self.aux_bytes = 0
        self.aux_bytes_peak = 0
        self.busy_seconds = 0.0


class AuxInstance:
    """Pruned adjacency lists for one directive in one frame.

    ``keys`` snapshots the selecting set; entry i holds either a stored
    list (lengths[i] >= 0, living at buffer[starts[i]:]) or a deferred
    marker (-1).  Deferred entries resolve lazily while the instance is
    writable; read-only instances (shipped to child tasks) fall back to
    their chain parent's list or raw adjacency without caching.
    """

    __slots__ = (
        "directive_id", "keys", "starts", "lengths", "buffer", "writable",
        "fil", "bound_val", "source", "fil_col", "fil_owner_deg",
    )

    def __init__(self, directive_id, keys, starts, lengths, buffer, fil,
                 bound_val, source, fil_col, fil_owner_deg):
        self.directive_id = directive_id
        self.keys = keys
        self.starts = starts
        self.lengths = lengths
        self.buffer = buffer
        self.writable = True
        self.fil = fil
        self.bound_val = bound_val
        self.source = source
        self.fil_col = fil_col
        self.fil_owner_deg = fil_owner_deg


class _Shared:
    """Work distribution for the parallel driver: a root cursor plus a
    queue of packaged depth-2 window tasks."""

    def __init__(self, total_roots: int, chunk: int) -> None:
        self.lock = threading.Lock()
        self.cond = threading.Condition(self.lock)
        self.cursor = 0
        self.total = total_roots
        self.chunk = max(1, chunk)
        self.queue: deque = deque()
        self.pending = 0

    def put_windows(self, tasks) -> None:
        with self.cond:
            self.queue.extend(tasks)
            self.pending += len(tasks)
            self.cond.notify_all()

    def next_task(self):
        with self.cond:
            while True:
                if self.queue:
                    return ("window", self.queue.popleft())
                if self.cursor < self.total:
                    lo = self.cursor
                    hi = min(self.total, lo + self.chunk)
                    self.cursor = hi
                    self.pending += 1
                    return ("roots", (lo, hi))
                if self.pending <= 0:
                    return None
                self.cond.wait()

    def task_done(self) -> None:
        with self.cond:
            self.pending -= 1
            if self.pending <= 0:
                self.cond.notify_all()


class _Tables:
    """Plan unpacked into flat arrays for the hot loops."""

    def __init__(self, plan: QueryPlan) -> None:
        self.n = plan.n
        slots = plan.slots
        self.num_slots = len(slots)
        self.slot_depth = [s.depth for s in slots]
        self.slot_base = [s.base for s in slots]
        self.slot_steps = [s.steps for s in slots]
        self.slot_bound = [s.bound for s in slots]
        self.slot_is_view = [s.base[0] == ADJ and not s.steps for s in slots]
        self.directives = plan.directives
        self.loops = plan.loops
        self.cand_slot = [
            lp.candidate[1] if lp.candidate[0] == SLOT else -1 for lp in plan.loops
        ]


def _bucket_of(deg: int) -> int:
    return deg.bit_length() - 1


def _excl_cumsum(x: np.ndarray) -> np.ndarray:
    out = np.empty(len(x), dtype=np.int64)
    if len(x):
        np.cumsum(x[:-1], out=out[1:])
        out[0] = 0
    return out


class _Worker:
    def __init__(self, plan, tables, graph, config, cost, sink, shared, allow_split):
        self.plan = plan
        self.t = tables
        self.graph = graph
        self.offsets = graph.offsets
        self.adj = graph.neighbors
        self.config = config
        self.cost = cost
        self.sink = sink
        self.shared = shared
        self.allow_split = allow_split
        self.instr = config.instrument
        self.strategy = plan.strategy
        self.matched = [0] * tables.n
        self.slot_values: list = [None] * tables.num_slots
        self.aux: dict[int, AuxInstance] = {}
        self.pool: dict[int, np.ndarray] = {}
        self.counters = _Counters(tables.num_slots)

    # --- graph access -----------------------------------------------------

    def _nbrs(self, u: int) -> np.ndarray:
        return self.adj[self.offsets[u]:self.offsets[u + 1]]

    def _deg(self, u: int) -> int:
        return int(self.offsets[u + 1] - self.offsets[u])

    # --- counter attribution ----------------------------------------------

    def _scan(self, col: int, amount: int, owner_deg: int) -> None:
        c = self.counters
        if col == _ADJ_COL:
            c.scanned_adjacency += amount
        elif col == _PREFIX_COL:
            c.scanned_prefix += amount
        else:
            c.scanned_pruned += amount
        if col != _PREFIX_COL and amount and owner_deg > 0:
            c.degree_hist[_bucket_of(owner_deg)] += amount

    def _slot_src(self, sid: int) -> tuple[int, int]:
        """(counter column, owner degree) when slot sid's value is consumed."""
        if self.t.slot_is_view[sid]:
            owner = self.matched[self.t.slot_base[sid][1]]
            return _ADJ_COL, self._deg(owner)
        return _PREFIX_COL, 0

    # --- slot materialization ----------------------------------------------

    def _materialize_slot(self, sid: int) -> int:
        t = self.t
        base = t.slot_base[sid]
        bound = t.slot_bound[sid]
        if base[0] == ADJ:
            u = self.matched[base[1]]
            acc = self._nbrs(u)
            acc_col, acc_deg = _ADJ_COL, self._deg(u)
        else:
            acc = self.slot_values[base[1]]
            acc_col, acc_deg = self._slot_src(base[1])
        steps = t.slot_steps[sid]
        if not steps:
            # pure view; a bound becomes a zero-copy truncation
            if bound is not None:
                cut = int(np.searchsorted(acc, self.matched[bound[0]], side="left"))
                acc = acc[:cut]
            self.slot_values[sid] = acc
            if self.config.trace_hook is not None:
                self.config.trace_hook(t.slot_depth[sid], sid, len(acc))
            return len(acc)
        last = len(steps) - 1
        check = self.config.check_invariants
        parent = acc
        for i, (op, operand) in enumerate(steps):
            if operand[0] == ADJ:
                v = self.matched[operand[1]]
                b = self._nbrs(v)
                b_col, b_deg = _ADJ_COL, self._deg(v)
            else:  # AUX lookup
                v = self.matched[operand[2]]
                b, b_col, b_deg = self._lookup_aux(operand[1], v)
            bval = self.matched[bound[0]] if (bound is not None and i == last) else None
            if op == INTERSECT:
                res, sa, sb, comps = intersect_counts(acc, b, bval)
            else:
                res, sa, sb, comps = subtract_counts(acc, b, bval)
            if self.instr:
                self._scan(acc_col, sa, acc_deg)
                self._scan(b_col, sb, b_deg)
                self.counters.comparisons += comps
                row = self.counters.per_slot[sid]
                row[acc_col] += sa
                row[b_col] += sb
                row[_COMP_COL] += comps
            if self.config.shadow:
                ref, rsa, rsb, rcomp = merge_reference(
                    acc, b, "intersect" if op == INTERSECT else "subtract", bval
                )
                if (rsa, rsb, rcomp) != (sa, sb, comps) or not np.array_equal(res, np.asarray(ref, dtype=res.dtype)):
                    raise EngineError(f"shadow mismatch building slot {sid}")
            acc = res
            acc_col, acc_deg = _PREFIX_COL, 0
        if check:
            if len(acc) > 1 and not bool(np.all(np.diff(acc) > 0)):
                raise EngineError(f"slot {sid} not strictly ascending")
            if base[0] == SLOT and len(acc):
                pos = np.searchsorted(parent, acc)
                ok = (pos < len(parent)) & (parent[np.minimum(pos, len(parent) - 1)] == acc)
                if not bool(np.all(ok)):
                    raise EngineError(f"slot {sid} is not a subset of its parent")
        self.slot_values[sid] = acc
        if self.config.trace_hook is not None:
            self.config.trace_hook(t.slot_depth[sid], sid, len(acc))
        return len(acc)

    # --- directive instances -----------------------------------------------

    def _build_aux(self, did: int) -> None:
        d = self.t.directives[did]
        keys = self.slot_values[d.selecting_slot]
        fil = self.slot_values[d.filtering_slot]
        fil_col, fil_deg = self._slot_src(d.filtering_slot)
        bound_val = self.matched[d.bound[0]] if d.bound is not None else None
        source = None
        if isinstance(d.build_source, int):
            source = self.aux[d.build_source]
        nk = len(keys)
        keys64 = np.asarray(keys, dtype=np.int64)
        degs = self.offsets[keys64 + 1] - self.offsets[keys64]
        need = int(degs.sum())
        buffer = self._pool_buffer(did, need)
        starts = _excl_cumsum(degs)
        lengths = np.full(nk, -1, dtype=np.int64)
        inst = AuxInstance(did, keys, starts, lengths, buffer, fil, bound_val,
                           source, fil_col, fil_deg if fil_col == _ADJ_COL else 0)
        self.aux[did] = inst
        if nk == 0:
            return
        if d.strategy_gate == "always":
            subset = np.arange(nk, dtype=np.int64)
        else:
            gain = self._gain_vector(d, degs, len(fil), nk)
            subset = np.flatnonzero(
                (gain > 0.0) & (degs < self.cost.high_degree_threshold)
            ).astype(np.int64)
        if len(subset):
            self._batch_prune(inst, subset)
        if self.config.verify_chains and source is not None and len(subset):
            self._verify_chain(inst, subset)

    def _gain_vector(self, d, degs, fil_live, sel_live):
        e_hat = self.cost.factors[d.id]
        for bs in self.cost.base_slots[d.id]:
            e_hat *= len(self.slot_values[bs])
        e_hat /= max(sel_live, 1)
        degf = degs.astype(np.float64)
        est_cap = fil_live * degf / max(self.cost.vertex_count, 1)
        return e_hat * (degf - est_cap) - (fil_live + degf)

    def _pool_buffer(self, did: int, need: int) -> np.ndarray:
        buf = self.pool.get(did)
        if buf is None or len(buf) < need:
            cap = 1024
            while cap < need:
                cap <<= 1
            old = 0 if buf is None else buf.nbytes
            buf = np.empty(cap, dtype=self.adj.dtype)
            self.pool[did] = buf
            c = self.counters
            c.aux_bytes += buf.nbytes - old
            if c.aux_bytes > c.aux_bytes_peak:
                c.aux_bytes_peak = c.aux_bytes
        return buf

    def _source_spans(self, inst: AuxInstance, subset: np.ndarray):
        """(source array, span starts, span lengths, source column) for the
        subset of keys, resolving chain parents.  Falls back to raw
        adjacency when a read-only parent still has deferred entries."""
        keys = np.asarray(inst.keys, dtype=np.int64)[subset]
        parent = inst.source
        if parent is not None:
            idx = np.searchsorted(parent.keys, keys)
            deferred = parent.lengths[idx] < 0
            if bool(np.any(deferred)):
                if parent.writable:
                    self._batch_prune(parent, idx[deferred])
                else:
                    parent = None
            if parent is not None:
                return parent.buffer, parent.starts[idx], parent.lengths[idx], _PRUNED_COL
        return self.adj, self.offsets[keys], self.offsets[keys + 1] - self.offsets[keys], _ADJ_COL

    def _batch_prune(self, inst: AuxInstance, subset: np.ndarray) -> None:
        """Prune the given key indices, writing each surviving list into its
        reserved span.  Counter math mirrors the scalar kernels per key."""
        a = inst.fil
        bound_val = inst.bound_val
        if bound_val is not None:
            a = a[: int(np.searchsorted(a, bound_val, side="left"))]
        src, s_starts, s_lens, b_col = self._source_spans(inst, subset)
        keys64 = np.asarray(inst.keys, dtype=np.int64)[subset]
        orig_deg = (self.offsets[keys64 + 1] - self.offsets[keys64])
        nz = s_lens > 0
        if len(a) == 0 or not bool(np.any(nz)):
            inst.lengths[subset] = 0
            return
        sub_nz = subset[nz]
        st = s_starts[nz]
        ln = s_lens[nz]
        total = int(ln.sum())
        rel = _excl_cumsum(ln)
        gidx = np.repeat(st - rel, ln) + np.arange(total, dtype=np.int64)
        big = src[gidx]
        below = big < bound_val if bound_val is not None else np.ones(total, dtype=bool)
        blen = np.add.reduceat(below.astype(np.int64), rel)
        pos = np.searchsorted(a, big)
        member = (pos < len(a)) & (a[np.minimum(pos, len(a) - 1)] == big)
        keep = member & below
        m = np.add.reduceat(keep.astype(np.int64), rel)
        # exact merge counters: scan depth is min(last a', last b') per key
        has_b = blen > 0
        b_last = np.zeros(len(ln), dtype=np.int64)
        b_last[has_b] = big[(rel + blen - 1)[has_b]]
        tcap = np.minimum(int(a[-1]), b_last)
        sa = np.where(has_b, np.searchsorted(a, tcap, side="right"), 0)
        sb = np.add.reduceat((big <= np.repeat(tcap, ln)).astype(np.int64), rel)
        sb = np.where(has_b, sb, 0)
        m = np.where(has_b, m, 0)
        comps = sa + sb - m
        surv = big[keep]
        out_off = np.repeat(inst.starts[sub_nz] - _excl_cumsum(m), m) + np.arange(len(surv), dtype=np.int64)
        inst.buffer[out_off] = surv
        inst.lengths[subset] = 0
        inst.lengths[sub_nz] = m
        if self.instr:
            c = self.counters
            self._scan(inst.fil_col, int(sa.sum()), inst.fil_owner_deg)
            deg_nz = orig_deg[nz]
            if b_col == _ADJ_COL:
                c.scanned_adjacency += int(sb.sum())
            else:
                c.scanned_pruned += int(sb.sum())
            pos_deg = deg_nz > 0
            if bool(np.any(pos_deg)):
                buckets = (np.frexp(deg_nz[pos_deg].astype(np.float64))[1] - 1).astype(np.int64)
                np.add.at(c.degree_hist, buckets, sb[pos_deg])
            c.comparisons += int(comps.sum())
        if self.config.shadow:
            self._shadow_check_batch(inst, sub_nz, src, st, ln, sa, sb, m, comps)
        if self.config.check_invariants:
            self._containment_check(inst, sub_nz, src, st, ln)

    def _shadow_check_batch(self, inst, sub_nz, src, st, ln, sa, sb, m, comps):
        fil = inst.fil
        for j in range(len(sub_nz)):
            b = src[st[j]:st[j] + ln[j]]
            ref, rsa, rsb, rcomp = merge_reference(fil, b, "intersect", inst.bound_val)
            i = sub_nz[j]
            stored = inst.buffer[inst.starts[i]:inst.starts[i] + inst.lengths[i]]
            if (rsa, rsb, rcomp) != (int(sa[j]), int(sb[j]), int(comps[j])) or list(stored) != ref:
                raise EngineError(f"shadow mismatch in directive {inst.directive_id}")

    def _containment_check(self, inst, sub_nz, src, st, ln):
        for j in range(len(sub_nz)):
            i = sub_nz[j]
            stored = inst.buffer[inst.starts[i]:inst.starts[i] + inst.lengths[i]]
            if len(stored) > 1 and not bool(np.all(np.diff(stored) > 0)):
                raise EngineError("pruned list not strictly ascending")
            b = src[st[j]:st[j] + ln[j]]
            if len(stored) and not bool(np.all(np.isin(stored, b))):
                raise EngineError("pruned list not contained in its source list")
            if len(stored) and not bool(np.all(np.isin(stored, inst.fil))):
                raise EngineError("pruned list not contained in the filtering set")

    def _verify_chain(self, inst: AuxInstance, subset: np.ndarray) -> None:
        """Recompute the pruned subset straight from raw adjacency and demand
        byte equality with the chained build."""
        keys64 = np.asarray(inst.keys, dtype=np.int64)[subset]
        a = inst.fil
        if inst.bound_val is not None:
            a = a[: int(np.searchsorted(a, inst.bound_val, side="left"))]
        for j, i in enumerate(subset):
            u = int(keys64[j])
            b = self._nbrs(u)
            if inst.bound_val is not None:
                b = b[: int(np.searchsorted(b, inst.bound_val, side="left"))]
            if len(a) == 0 or len(b) == 0:
                direct = np.empty(0, dtype=b.dtype)
            else:
                pos = np.searchsorted(a, b)
                direct = b[(pos < len(a)) & (a[np.minimum(pos, len(a) - 1)] == b)]
            stored = inst.buffer[inst.starts[i]:inst.starts[i] + inst.lengths[i]]
            if not np.array_equal(stored, direct):
                raise EngineError(
                    f"chained build of directive {inst.directive_id} diverges for key {u}"
                )
        self.counters.chain_frames += 1

    def _lookup_aux(self, did: int, u: int):
        inst = self.aux[did]
        while True:
            i = int(np.searchsorted(inst.keys, u))
            if i >= len(inst.keys) or inst.keys[i] != u:
                raise EngineError(f"vertex {u} missing from directive {did} index")
            ln = int(inst.lengths[i])
            if ln >= 0:
                s = int(inst.starts[i])
                return inst.buffer[s:s + ln], _PRUNED_COL, self._deg(u)
            if inst.writable:
                self._batch_prune(inst, np.array([i], dtype=np.int64))
                ln = int(inst.lengths[i])
                s = int(inst.starts[i])
                return inst.buffer[s:s + ln], _PRUNED_COL, self._deg(u)
            if inst.source is None:
                return self._nbrs(u), _ADJ_COL, self._deg(u)
            inst = inst.source  # read-only: walk the chain without caching

    # --- loop driver --------------------------------------------------------

    def _materialize_after(self, p: int) -> bool:
        lp = self.t.loops[p]
        for sid in lp.slots_after:
            if self._materialize_slot(sid) == 0:
                return False
        for did in lp.aux_after:
            self._build_aux(did)
        return True

    def _window(self, p: int, cand: np.ndarray) -> tuple[int, int]:
        lp = self.t.loops[p]
        lo, hi = 0, len(cand)
        for s_pos in lp.lower_bounds:
            lo = max(lo, int(np.searchsorted(cand, self.matched[s_pos], side="right")))
        for l_pos in lp.upper_bounds:
            hi = min(hi, int(np.searchsorted(cand, self.matched[l_pos], side="left")))
        return lo, hi

    def run_root(self, v: int) -> None:
        self.matched[0] = v
        if self._materialize_after(0):
            self._run_position(1, None, None, self.allow_split)

    def _run_position(self, p, forced_lo, forced_hi, may_split) -> None:
        t = self.t
        cand = self.slot_values[t.cand_slot[p]]
        lo, hi = self._window(p, cand)
        if forced_lo is not None:
            lo, hi = max(lo, forced_lo), min(hi, forced_hi)
        if lo >= hi:
            return
        lp = t.loops[p]
        matched = self.matched
        if p == t.n - 1:
            self._emit_final(cand, lo, hi, lp.distinct)
            return
        if (
            p == 1
            and may_split
            and self.shared is not None
            and self.config.nested
            and hi - lo > self.config.nested_threshold
        ):
            self._offer_windows(lo, hi)
            return
        distinct = lp.distinct
        for idx in range(lo, hi):
            c = int(cand[idx])
            skip = False
            for j in distinct:
                if matched[j] == c:
                    skip = True
                    break
            if skip:
                continue
            matched[p] = c
            if self._materialize_after(p):
                self._run_position(p + 1, None, None, may_split)

    def _emit_final(self, cand, lo, hi, distinct) -> None:
        if not self.sink.wants_tuples:
            count = hi - lo
            for j in distinct:
                v = self.matched[j]
                i = int(np.searchsorted(cand, v))
                if lo <= i < hi and cand[i] == v:
                    count -= 1
            self.counters.match_count += count
            return
        matched = self.matched
        p = self.t.n - 1
        for idx in range(lo, hi):
            c = int(cand[idx])
            skip = False
            for j in distinct:
                if matched[j] == c:
                    skip = True
                    break
            if skip:
                continue
            matched[p] = c
            self.counters.match_count += 1
            self.sink.emit(tuple(matched))

    def _offer_windows(self, lo: int, hi: int) -> None:
        for inst in self.aux.values():
            inst.writable = False
        for did in list(self.aux):
            self.pool.pop(did, None)  # children now own these buffers
        snapshot = (self.matched[0], list(self.slot_values), dict(self.aux))
        step = self.config.nested_threshold
        tasks = [
            (snapshot, w, min(hi, w + step))
            for w in range(lo, hi, step)
        ]
        self.shared.put_windows(tasks)

    def run_window(self, task) -> None:
        (root, slot_values, aux), lo, hi = task
        self.matched[0] = root
        self.slot_values = list(slot_values)
        self.aux = dict(aux)
        self._run_position(1, lo, hi, False)


# ---------------------------------------------------------------------------
# drivers


def _make_stats(plan, counters_list, elapsed, workers) -> RunStats:
    num_slots = len(plan.slots)
    per_slot_arr = np.zeros((num_slots, 4), dtype=np.int64)
    hist = np.zeros(_HIST_BUCKETS, dtype=np.int64)
    total = _Counters(num_slots)
    busy = []
    for c in counters_list:
        total.match_count += c.match_count
        total.scanned_adjacency += c.scanned_adjacency
        total.scanned_prefix += c.scanned_prefix
        total.scanned_pruned += c.scanned_pruned
        total.comparisons += c.comparisons
        total.chain_frames += c.chain_frames
        per_slot_arr += c.per_slot
        hist += c.degree_hist
        total.aux_bytes_peak = max(total.aux_bytes_peak, c.aux_bytes_peak)
        busy.append(round(c.busy_seconds, 6))
    per_slot = {}
    for sid in range(num_slots):
        row = per_slot_arr[sid]
        if row.any():
            per_slot[sid] = {
                "scanned_adjacency": int(row[_ADJ_COL]),
                "scanned_prefix": int(row[_PREFIX_COL]),
                "scanned_pruned": int(row[_PRUNED_COL]),
                "comparisons": int(row[_COMP_COL]),
            }
    histogram = {
        str(1 << k): int(hist[k]) for k in range(_HIST_BUCKETS) if hist[k]
    }
    return RunStats(
        match_count=total.match_count,
        scanned_adjacency=total.scanned_adjacency,
        scanned_prefix=total.scanned_prefix,
        scanned_pruned=total.scanned_pruned,
        comparisons=total.comparisons,
        aux_bytes_peak_per_worker=total.aux_bytes_peak,
        elapsed_seconds=elapsed,
        workers=workers,
        strategy=plan.strategy,
        variant=plan.variant,
        per_slot=per_slot,
        degree_histogram=histogram,
        chain_frames_verified=total.chain_frames,
        busy_seconds=tuple(busy),
    )


def execute(plan: QueryPlan, graph: CsrGraph, sink=None, config: ExecConfig | None = None) -> RunStats:
    """Serial driver; the reference for counter-exactness."""
    config = config or ExecConfig()
    sink = sink if sink is not None else CountSink()
    tables = _Tables(plan)
    cost = bind_cost_model(plan, graph, config)
    worker = _Worker(plan, tables, graph, config, cost, sink, None, False)
    start = time.perf_counter()
    for v in range(graph.vertex_count):
        worker.run_root(v)
    elapsed = time.perf_counter() - start
    worker.counters.busy_seconds = elapsed
    if not sink.wants_tuples:
        sink.add_bulk(worker.counters.match_count)
    return _make_stats(plan, [worker.counters], elapsed, 1)


def execute_parallel(plan: QueryPlan, graph: CsrGraph, sink=None, config: ExecConfig | None = None) -> RunStats:
    """Threaded driver: the first loop is dealt out in chunks; with nested
    mode on, oversized second-loop windows are repackaged as tasks any idle
    worker can claim.  Match counts are worker-count invariant."""
    config = config or ExecConfig()
    if config.workers < 1:
        raise EngineError("workers must be >= 1")
    if config.workers == 1 and not config.nested:
        return execute(plan, graph, sink, config)
    sink = sink if sink is not None else CountSink()
    tables = _Tables(plan)
    cost = bind_cost_model(plan, graph, config)
    shared = _Shared(graph.vertex_count, config.first_loop_chunk)
    workers = [
        _Worker(plan, tables, graph, config, cost, sink, shared, True)
        for _ in range(config.workers)
    ]
    errors: list[BaseException] = []
    err_lock = threading.Lock()

    def main(w: _Worker) -> None:
        try:
            while True:
                task = shared.next_task()
                if task is None:
                    return
                t0 = time.perf_counter()
                try:
                    kind, payload = task
                    if kind == "roots":
                        for v in range(payload[0], payload[1]):
                            w.run_root(v)
                    else:
                        w.run_window(payload)
                finally:
                    shared.task_done()
                    w.counters.busy_seconds += time.perf_counter() - t0
        except BaseException as exc:  # surface worker failures to the caller
            with err_lock:
                errors.append(exc)
            with shared.cond:
                shared.pending = 0
                shared.cursor = shared.total
                shared.queue.clear()
                shared.cond.notify_all()

    start = time.perf_counter()
    threads = [threading.Thread(target=main, args=(w,), daemon=True) for w in workers]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    elapsed = time.perf_counter() - start
    if errors:
        raise errors[0]
    total = sum(w.counters.match_count for w in workers)
    if not sink.wants_tuples:
        sink.add_bulk(total)
    return _make_stats(plan, [w.counters for w in workers], elapsed, config.workers)
