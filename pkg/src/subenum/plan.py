"""Compile a (query, schedule) pair into an executable nested-loop plan.

Depth convention: loop d matches order position d (0-based).  A slot at
depth h holds a set computed once the first h positions are matched; the
candidate set for position p is the slot (target=p, depth=p).  A slot
(target=i, depth=h) exists whenever some matched position j < h is adjacent
to position i, and its program is the incremental chain

    slot(i, h) = slot(i, h-1) op N(matched[h-1])

with op = intersect for a query edge and, in the vertex-induced variant,
subtract for a non-edge (the edge-induced variant skips non-edges, so the
slot simply carries forward).  Programs are canonically equal when their
intersect-operand set, subtract-operand set, and bound coincide; logical
slots with equal programs share one physical slot, computed once per frame.

A directive records that the adjacency operand N(u) consumed at loop k by
target i can be replaced by a pruned list built earlier: at depth h, for
every u in the selecting slot (position k-1's prefix at depth h), the list
filtering_slot ∩ N(u) is precomputed.  Because candidates only shrink along
a prefix chain, pruning against the depth-h filtering set preserves every
later intersection and subtraction exactly.  Directive discovery walks all
(h, k, i) combinations in O(n^3); duplicates collapse by program identity,
and a deeper directive whose programs extend a shallower one's can be built
from the shallower pruned lists instead of raw adjacency (a reuse chain).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Sequence

from .query import QueryGraph, Schedule

INTERSECT = "intersect"
SUBTRACT = "subtract"

# operand forms inside slot programs
ADJ = "adj"    # ("adj", position): adjacency list of the vertex matched there
SLOT = "slot"  # ("slot", slot_id): a previously materialized physical slot
AUX = "aux"    # ("aux", directive_id, position): pruned list lookup


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class PrefixSlot:
    """Logical slot: the prefix set of ``target`` at depth ``depth``.

    ``program`` is the fully unrolled operand list as (op, position) pairs;
    ``slot_id`` points at the physical slot shared by all logical slots with
    a canonically equal program.
    """

    target: int
    depth: int
    program: tuple[tuple[str, int], ...]
    bound: tuple[int, str] | None
    slot_id: int


@dataclass(frozen=True)
class PlanSlot:
    """Physical slot in build form: a base operand plus incremental steps."""

    id: int
    depth: int
    base: tuple  # ("adj", pos) | ("slot", slot_id)
    steps: tuple[tuple[str, tuple], ...]  # (op, operand)
    bound: tuple[int, str] | None
    targets: tuple[tuple[int, int], ...]  # (target, depth) aliases served


@dataclass(frozen=True)
class AuxDirective:
    """Build pruned adjacency lists at ``depth`` for later loops.

    ``target_uses`` lists (k, i) pairs: the set op at loop k computing the
    prefix of target i consumes the pruned list of the vertex matched at
    position k-1.  ``build_source`` is "graph" or a shallower directive id
    whose lists this build refines.  ``card_loops`` carries the compile-time
    structure of the cardinality estimate used by the online gate: one
    (base_slot_id | None, multiplier tags) entry per loop in (h, k].
    """

    id: int
    depth: int
    selecting_slot: int
    filtering_slot: int
    target_uses: tuple[tuple[int, int], ...]
    build_source: object  # "graph" | int
    strategy_gate: str  # "always" | "cost-model"
    bound: tuple[int, str] | None
    card_loops: tuple[tuple[object, tuple[str, ...]], ...] = ()


@dataclass(frozen=True)
class LoopPlan:
    position: int
    candidate: tuple  # ("all",) | ("slot", slot_id)
    lower_bounds: tuple[int, ...]  # positions whose match is a strict lower bound
    upper_bounds: tuple[int, ...]  # positions whose match is a strict upper bound
    distinct: tuple[int, ...]  # earlier non-adjacent, unrestricted positions
    slots_after: tuple[int, ...]  # physical slots materialized after this match
    aux_after: tuple[int, ...]  # directives built after this match


@dataclass(frozen=True)
class QueryPlan:
    query: QueryGraph
    schedule: Schedule
    strategy: str
    n: int
    order: tuple[int, ...]
    restrictions: tuple[tuple[int, int], ...]
    prefix_slots: tuple[PrefixSlot, ...]
    slots: tuple[PlanSlot, ...]
    directives: tuple[AuxDirective, ...]
    loops: tuple[LoopPlan, ...]

    @property
    def variant(self) -> str:
        return self.schedule.variant

    def candidate_slot_id(self, position: int) -> int | None:
        for ps in self.prefix_slots:
            if ps.target == position and ps.depth == position:
                return ps.slot_id
        return None


# ---------------------------------------------------------------------------
# prefix slots


def _canonical_key(program, bound):
    inter = frozenset(p for op, p in program if op == INTERSECT)
    sub = frozenset(p for op, p in program if op == SUBTRACT)
    return (inter, sub, bound)


def _program_depth(program) -> int:
    return 1 + max(p for _, p in program)


def _candidate_upper_bound(schedule: Schedule, position: int) -> tuple[int, str] | None:
    uppers = sorted(
        larger for smaller, larger in schedule.restrictions
        if smaller == position and larger < position
    )
    if uppers:
        return (uppers[0], "upper")
    return None


def plan_prefix_sets(q: QueryGraph, schedule: Schedule) -> list[PrefixSlot]:
    """All logical slots, ordered by (target, depth), with shared physical ids.

    A candidate slot (target == depth) whose program really ends at its own
    loop carries the upper-bound restriction, if one exists, pushed into its
    final set op; bounds that cannot be pushed are enforced while iterating.
    """
    n = q.vertex_count
    order = schedule.order
    vertex_induced = schedule.variant == "vertex"
    out: list[PrefixSlot] = []
    key_to_id: dict = {}

    for target in range(1, n):
        program: list[tuple[str, int]] = []
        materialized = False
        for depth in range(1, target + 1):
            new_pos = depth - 1
            adjacent = q.has_edge(order[new_pos], order[target])
            if not materialized:
                if not adjacent:
                    continue  # no intersection available yet
                program.append((INTERSECT, new_pos))
                if vertex_induced:
                    program.extend((SUBTRACT, j) for j in range(new_pos))
                materialized = True
            else:
                if adjacent:
                    program.append((INTERSECT, new_pos))
                elif vertex_induced:
                    program.append((SUBTRACT, new_pos))
                # edge-induced non-edge: program carries forward unchanged
            bound = None
            if depth == target:
                cand_bound = _candidate_upper_bound(schedule, target)
                if cand_bound is not None and _program_depth(program) == target:
                    bound = cand_bound
            key = _canonical_key(program, bound)
            slot_id = key_to_id.setdefault(key, len(key_to_id))
            out.append(
                PrefixSlot(
                    target=target,
                    depth=depth,
                    program=tuple(program),
                    bound=bound,
                    slot_id=slot_id,
                )
            )
    return out


def _build_physical_slots(slots: Sequence[PrefixSlot]) -> list[PlanSlot]:
    """Derive build-form physical slots from the logical listing.

    The first logical appearance of each physical id fixes its program; the
    base is the target's previous physical slot when one exists, so shared
    prefixes are computed once and extended incrementally.
    """
    by_id: dict[int, PlanSlot] = {}
    targets: dict[int, list[tuple[int, int]]] = {}
    prev_for_target: dict[int, tuple[int, tuple]] = {}  # target -> (slot_id, program)
    for ps in sorted(slots, key=lambda s: (s.target, s.depth)):
        targets.setdefault(ps.slot_id, []).append((ps.target, ps.depth))
        if ps.slot_id not in by_id:
            prev = prev_for_target.get(ps.target)
            if prev is not None and prev[1] == ps.program[: len(prev[1])] and len(prev[1]) < len(ps.program):
                base = (SLOT, prev[0])
                steps = tuple((op, (ADJ, pos)) for op, pos in ps.program[len(prev[1]):])
            else:
                first_op, first_pos = ps.program[0]
                if first_op != INTERSECT:
                    raise PlanError("slot program must start with an intersection")
                base = (ADJ, first_pos)
                steps = tuple((op, (ADJ, pos)) for op, pos in ps.program[1:])
            by_id[ps.slot_id] = PlanSlot(
                id=ps.slot_id,
                depth=_program_depth(ps.program),
                base=base,
                steps=steps,
                bound=ps.bound,
                targets=(),
            )
        prev_for_target[ps.target] = (ps.slot_id, ps.program)
    return [
        replace(by_id[sid], targets=tuple(targets[sid]))
        for sid in sorted(by_id)
    ]


# ---------------------------------------------------------------------------
# directive discovery


def _alias_map(slots: Sequence[PrefixSlot]) -> dict[tuple[int, int], PrefixSlot]:
    return {(s.target, s.depth): s for s in slots}


def find_aux_directives(
    q: QueryGraph, schedule: Schedule, slots: Sequence[PrefixSlot]
) -> list[AuxDirective]:
    """Enumerate every (h, k, i) pruning opportunity.

    For each prefix set whose final op actually runs at loop k in [3, n-1]
    (including the last position's candidate set), and each depth h <= k-2
    at which both the target's and position k-1's prefixes exist, the
    adjacency operand N(matched[k-1]) can instead read pruned lists built at
    depth h.  Output order is independent of the iteration order of
    ``slots`` (set semantics); duplicates are collapsed later.
    """
    n = q.vertex_count
    alias = _alias_map(slots)
    raw: list[AuxDirective] = []
    seen: set[tuple] = set()
    for ps in slots:
        k = ps.depth
        if k < 3 or k > n - 1:
            continue
        if _program_depth(ps.program) != k:
            continue  # carried forward: no set op runs at loop k
        i = ps.target
        for h in range(1, k - 1):
            fil = alias.get((i, h))
            sel = alias.get((k - 1, h))
            if fil is None or sel is None:
                continue
            bound = None
            if ps.bound is not None and ps.bound[0] < h:
                bound = ps.bound
            key = (h, k, i)
            if key in seen:
                continue
            seen.add(key)
            raw.append(
                AuxDirective(
                    id=len(raw),
                    depth=h,
                    selecting_slot=sel.slot_id,
                    filtering_slot=fil.slot_id,
                    target_uses=((k, i),),
                    build_source="graph",
                    strategy_gate="always",
                    bound=bound,
                )
            )
    return sorted(raw, key=lambda d: (d.depth, d.target_uses))


def dedup_aux_directives(directives: Sequence[AuxDirective]) -> list[AuxDirective]:
    """Collapse directives with identical (selecting, filtering, depth).

    Physical slot ids encode canonical program identity, so directives that
    agree on them at the same depth would build byte-identical pruned lists;
    one build serves all use sites.  The pushed bound survives only if every
    merged use site carries the same one.
    """
    groups: dict[tuple, list[AuxDirective]] = {}
    for d in directives:
        groups.setdefault((d.depth, d.selecting_slot, d.filtering_slot), []).append(d)
    out = []
    for key in sorted(groups):
        members = groups[key]
        uses = tuple(sorted({u for d in members for u in d.target_uses}))
        bounds = {d.bound for d in members}
        bound = bounds.pop() if len(bounds) == 1 else None
        out.append(
            replace(members[0], id=len(out), target_uses=uses, bound=bound)
        )
    return out


def link_reuse_chains(
    directives: Sequence[AuxDirective], logical: Sequence[PrefixSlot]
) -> list[AuxDirective]:
    """Point each directive at the deepest shallower directive it refines.

    D' refines D when they share a use site, D is shallower, both of D's
    programs are operand-subsets of D''s, and D's lists are not truncated by
    a bound D' lacks.  Then every pruned list of D' equals
    filtering' ∩ (pruned list of D), which is cheaper than re-reading raw
    adjacency.  Depths increase strictly along a chain, so cycles cannot
    form.
    """
    def key_sets(slot_id):
        for ps in logical:
            if ps.slot_id == slot_id:
                return (
                    frozenset(p for op, p in ps.program if op == INTERSECT),
                    frozenset(p for op, p in ps.program if op == SUBTRACT),
                )
        raise PlanError(f"unknown slot id {slot_id}")

    out = []
    for d in sorted(directives, key=lambda d: (d.depth, d.id)):
        best: AuxDirective | None = None
        for cand in out:  # already processed -> strictly shallower or equal depth
            if cand.depth >= d.depth:
                continue
            if not set(cand.target_uses) & set(d.target_uses):
                continue
            if cand.bound is not None and cand.bound != d.bound:
                continue
            cs_i, cs_s = key_sets(cand.selecting_slot)
            ds_i, ds_s = key_sets(d.selecting_slot)
            cf_i, cf_s = key_sets(cand.filtering_slot)
            df_i, df_s = key_sets(d.filtering_slot)
            if not (cs_i <= ds_i and cs_s <= ds_s and cf_i <= df_i and cf_s <= df_s):
                continue
            if best is None or cand.depth > best.depth:
                best = cand
        out.append(replace(d, build_source=best.id if best is not None else "graph"))
    return out


# ---------------------------------------------------------------------------
# plan assembly


def compile_plan(q: QueryGraph, schedule: Schedule, strategy: str = "none") -> QueryPlan:
    """Assemble the full plan for one strategy.

    "none" strips every directive; "eager" builds all pruned lists at their
    directive depth; "online" keeps the directives but defers each entry to
    a runtime cost-model decision.  When several directives could feed one
    use site the deepest wins (its filtering set is the most selective);
    shallower ones survive only while a kept directive chains from them.
    All operand references are resolved here, so execution never searches.
    """
    if strategy not in ("none", "eager", "online"):
        raise PlanError(f"unknown strategy {strategy!r}")
    _validate_schedule(q, schedule)
    n = q.vertex_count
    logical = plan_prefix_sets(q, schedule)
    physical = _build_physical_slots(logical)
    alias = _alias_map(logical)

    directives: list[AuxDirective] = []
    rewrites: dict[tuple[int, int], int] = {}  # (slot_id, operand_pos) -> directive id
    if strategy != "none":
        linked = link_reuse_chains(dedup_aux_directives(find_aux_directives(q, schedule, logical)), logical)
        by_id = {d.id: d for d in linked}

        # deepest directive wins each use site
        site_winner: dict[tuple[int, int], int] = {}
        for d in linked:
            for use in d.target_uses:
                cur = site_winner.get(use)
                if cur is None or by_id[cur].depth < d.depth:
                    site_winner[use] = d.id
        # collapse winners whose programs equal their chain parent's: the
        # parent's lists are byte-identical, so re-building them is waste
        def resolve(did: int) -> int:
            d = by_id[did]
            while isinstance(d.build_source, int):
                parent = by_id[d.build_source]
                if (
                    parent.selecting_slot == d.selecting_slot
                    and parent.filtering_slot == d.filtering_slot
                    and parent.bound == d.bound
                ):
                    d = parent
                else:
                    break
            return d.id

        keep: set[int] = set()
        for use, did in site_winner.items():
            site_winner[use] = resolve(did)
            keep.add(site_winner[use])
        # chain ancestors of kept directives stay alive as build anchors
        frontier = list(keep)
        while frontier:
            d = by_id[frontier.pop()]
            if isinstance(d.build_source, int) and d.build_source not in keep:
                keep.add(d.build_source)
                frontier.append(d.build_source)

        gate = "always" if strategy == "eager" else "cost-model"
        final = sorted((by_id[i] for i in keep), key=lambda d: (d.depth, d.selecting_slot, d.filtering_slot))
        renumber = {d.id: new for new, d in enumerate(final)}
        directives = [
            replace(
                d,
                id=renumber[d.id],
                build_source=renumber[d.build_source] if isinstance(d.build_source, int) else "graph",
                strategy_gate=gate,
                card_loops=_card_structure(q, schedule, alias, d),
            )
            for d in final
        ]
        for (k, i), did in site_winner.items():
            use_slot = alias[(i, k)].slot_id
            rewrites[(use_slot, k - 1)] = renumber[did]

    # rewrite slot operands to their pruned sources
    slots: list[PlanSlot] = []
    for s in physical:
        steps = []
        for op, operand in s.steps:
            if operand[0] == ADJ and (s.id, operand[1]) in rewrites:
                steps.append((op, (AUX, rewrites[(s.id, operand[1])], operand[1])))
            else:
                steps.append((op, operand))
        base = s.base
        if base[0] == ADJ and (s.id, base[1]) in rewrites:
            # base views are never rewritten: a directive requires a set op
            # at loop k, which implies a multi-operand program
            raise PlanError("directive targets a base view operand")
        slots.append(replace(s, steps=tuple(steps)))

    loops = _build_loops(q, schedule, logical, slots, directives)
    plan = QueryPlan(
        query=q,
        schedule=schedule,
        strategy=strategy,
        n=n,
        order=tuple(schedule.order),
        restrictions=tuple(schedule.restrictions),
        prefix_slots=tuple(logical),
        slots=tuple(slots),
        directives=tuple(directives),
        loops=tuple(loops),
    )
    validate_plan(plan)
    return plan


def card_tags(q: QueryGraph, order: Sequence[int], target: int, from_depth: int) -> tuple[str, ...]:
    """Multiplier tags estimating |candidate(target)| from its depth-h prefix.

    One factor per query edge from ``target`` into positions in
    [from_depth, target): "p2" when some earlier position closes a wedge
    over that edge (common-neighbor intersection), "p1" otherwise (plain
    edge probability).
    """
    tags = []
    for j in range(from_depth, target):
        if not q.has_edge(order[j], order[target]):
            continue
        wedge = any(
            q.has_edge(order[t], order[j]) and q.has_edge(order[t], order[target])
            for t in range(j)
        )
        tags.append("p2" if wedge else "p1")
    return tuple(tags)


def _card_structure(q, schedule, alias, d: AuxDirective):
    """Per-loop (base slot, multiplier tags) entries for the gain estimate.

    For each loop l in (h, k] the candidate count is estimated from the
    deepest prefix of that loop's target available at depth <= h, scaled by
    one factor per query edge into the not-yet-matched range: p2 when an
    earlier common neighbor closes a wedge, else p1.
    """
    order = schedule.order
    h = d.depth
    # with merged use sites, estimate up to the first consuming loop; the
    # shorter product under-counts reuse, which only delays pruning
    k = d.target_uses[0][0]
    entries = []
    for p in range(h, k):  # 0-based positions matched at loops h+1..k
        base_slot = None
        base_depth = 0
        for hh in range(h, 0, -1):
            ps = alias.get((p, hh))
            if ps is not None:
                base_slot = ps.slot_id
                base_depth = hh
                break
        entries.append((base_slot, card_tags(q, order, p, base_depth)))
    return tuple(entries)


def _build_loops(q, schedule, logical, slots, directives) -> list[LoopPlan]:
    n = q.vertex_count
    alias = _alias_map(logical)
    restr = set(schedule.restrictions)
    loops = []
    for p in range(n):
        if p == 0:
            candidate: tuple = ("all",)
        else:
            ps = alias.get((p, p))
            if ps is None:
                raise PlanError(f"no candidate slot for position {p}; order not connected")
            candidate = (SLOT, ps.slot_id)
        lowers = tuple(sorted(s for s, l in restr if l == p and s < p))
        uppers = tuple(sorted(l for s, l in restr if s == p and l < p))
        distinct = tuple(
            j for j in range(p)
            if not q.has_edge(schedule.order[j], schedule.order[p])
            and (j, p) not in restr and (p, j) not in restr
        )
        depth = p + 1
        slot_ids = [s.id for s in slots if s.depth == depth]
        cand_next = alias.get((p + 1, p + 1))
        if cand_next is not None and cand_next.slot_id in slot_ids:
            slot_ids.remove(cand_next.slot_id)
            slot_ids.insert(0, cand_next.slot_id)
        aux_ids = tuple(d.id for d in directives if d.depth == depth)
        loops.append(
            LoopPlan(
                position=p,
                candidate=candidate,
                lower_bounds=lowers,
                upper_bounds=uppers,
                distinct=distinct,
                slots_after=tuple(slot_ids),
                aux_after=aux_ids,
            )
        )
    return loops


# ---------------------------------------------------------------------------
# validation


def _validate_schedule(q: QueryGraph, schedule: Schedule) -> None:
    n = q.vertex_count
    if sorted(schedule.order) != list(range(n)):
        raise PlanError(f"order {schedule.order} is not a permutation of 0..{n-1}")
    for i in range(1, n):
        if not any(q.has_edge(schedule.order[j], schedule.order[i]) for j in range(i)):
            raise PlanError(f"order position {i} has no earlier neighbor")
    # restrictions must form a DAG over positions
    pairs = set(schedule.restrictions)
    for a, b in pairs:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            raise PlanError(f"bad restriction pair ({a}, {b})")
    adj: dict[int, list[int]] = {}
    for a, b in pairs:
        adj.setdefault(a, []).append(b)
    state = [0] * n

    def dfs(v: int) -> None:
        state[v] = 1
        for w in adj.get(v, ()):
            if state[w] == 1:
                raise PlanError("restriction pairs form a cycle")
            if state[w] == 0:
                dfs(w)
        state[v] = 2

    for v in range(n):
        if state[v] == 0:
            dfs(v)


def validate_plan(plan: QueryPlan) -> None:
    """Static resolution check: every reference a frame will follow exists
    and respects depth ordering.  Raises :class:`PlanError` on violation."""
    slot_by_id = {s.id: s for s in plan.slots}
    dir_by_id = {d.id: d for d in plan.directives}
    for s in plan.slots:
        if s.base[0] == SLOT:
            parent = slot_by_id.get(s.base[1])
            if parent is None or parent.depth >= s.depth:
                raise PlanError(f"slot {s.id} base does not precede it")
        elif s.base[0] == ADJ:
            if s.base[1] >= s.depth:
                raise PlanError(f"slot {s.id} base position not yet matched")
        for op, operand in s.steps:
            if op not in (INTERSECT, SUBTRACT):
                raise PlanError(f"slot {s.id} has unknown op {op!r}")
            if operand[0] == ADJ:
                if operand[1] >= s.depth:
                    raise PlanError(f"slot {s.id} operand position not yet matched")
            elif operand[0] == AUX:
                d = dir_by_id.get(operand[1])
                if d is None:
                    raise PlanError(f"slot {s.id} references missing directive {operand[1]}")
                if d.depth > s.depth:
                    raise PlanError(f"slot {s.id} reads directive {d.id} built deeper")
            else:
                raise PlanError(f"slot {s.id} has unknown operand {operand!r}")
        if s.bound is not None and s.bound[0] >= s.depth:
            raise PlanError(f"slot {s.id} bound position not yet matched")
    seen_depth: dict[int, int] = {}
    for d in plan.directives:
        for ref in (d.selecting_slot, d.filtering_slot):
            slot = slot_by_id.get(ref)
            if slot is None:
                raise PlanError(f"directive {d.id} references missing slot {ref}")
            if slot.depth > d.depth:
                raise PlanError(f"directive {d.id} reads slot {ref} materialized deeper")
        if isinstance(d.build_source, int):
            parent = dir_by_id.get(d.build_source)
            if parent is None:
                raise PlanError(f"directive {d.id} chains to missing {d.build_source}")
            if parent.depth >= d.depth:
                raise PlanError(f"directive {d.id} chains to non-shallower {parent.id}")
        seen_depth[d.id] = d.depth
    for loop in plan.loops:
        if loop.candidate[0] == SLOT and loop.candidate[1] not in slot_by_id:
            raise PlanError(f"loop {loop.position} iterates missing slot")
        for sid in loop.slots_after:
            if slot_by_id[sid].depth != loop.position + 1:
                raise PlanError(f"loop {loop.position} materializes slot {sid} at wrong depth")
        for did in loop.aux_after:
            if dir_by_id[did].depth != loop.position + 1:
                raise PlanError(f"loop {loop.position} builds directive {did} at wrong depth")


# ---------------------------------------------------------------------------
# diagnostics


def plan_to_json(plan: QueryPlan) -> str:
    def operand_doc(operand):
        if operand[0] == ADJ:
            return {"kind": "adjacency", "position": operand[1]}
        if operand[0] == SLOT:
            return {"kind": "slot", "slot": operand[1]}
        return {"kind": "pruned", "directive": operand[1], "position": operand[2]}

    doc = {
        "order": list(plan.order),
        "variant": plan.variant,
        "strategy": plan.strategy,
        "restrictions": [list(p) for p in plan.restrictions],
        "prefix_slots": [
            {
                "target": ps.target,
                "depth": ps.depth,
                "program": [{"op": op, "position": pos} for op, pos in ps.program],
                "bound": list(ps.bound) if ps.bound else None,
                "slot": ps.slot_id,
            }
            for ps in plan.prefix_slots
        ],
        "slots": [
            {
                "id": s.id,
                "depth": s.depth,
                "base": operand_doc(s.base),
                "steps": [{"op": op, "operand": operand_doc(o)} for op, o in s.steps],
                "bound": list(s.bound) if s.bound else None,
                "targets": [list(t) for t in s.targets],
            }
            for s in plan.slots
        ],
        "directives": [
            {
                "id": d.id,
                "depth": d.depth,
                "selecting": d.selecting_slot,
                "filtering": d.filtering_slot,
                "uses": [list(u) for u in d.target_uses],
                "source": d.build_source,
                "gate": d.strategy_gate,
                "bound": list(d.bound) if d.bound else None,
            }
            for d in plan.directives
        ],
        "loops": [
            {
                "position": lp.position,
                "candidate": list(lp.candidate),
                "lower_bounds": list(lp.lower_bounds),
                "upper_bounds": list(lp.upper_bounds),
                "distinct": list(lp.distinct),
                "slots_after": list(lp.slots_after),
                "aux_after": list(lp.aux_after),
            }
            for lp in plan.loops
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2)
