import json
from dataclasses import replace
from pathlib import Path

import pytest

from conftest import pool_query
from subenum.plan import (
    PlanError,
    card_tags,
    compile_plan,
    dedup_aux_directives,
    find_aux_directives,
    plan_prefix_sets,
    plan_to_json,
    validate_plan,
)
from subenum.query import Schedule, build_schedule

GOLDEN = Path(__file__).parent / "golden" / "clique4_plan.json"


def chain_schedule_k4() -> Schedule:
    # the hand-checked canonical example: identity order, chain restrictions
    return Schedule(order=(0, 1, 2, 3), restrictions=((0, 1), (1, 2), (2, 3)), variant="edge")


def test_clique4_plan_matches_golden():
    plan = compile_plan(pool_query("clique4"), chain_schedule_k4(), "eager")
    assert plan_to_json(plan) + "\n" == GOLDEN.read_text()


def test_clique4_plan_structure():
    plan = compile_plan(pool_query("clique4"), chain_schedule_k4(), "eager")
    assert len(plan.slots) == 3
    s0, s1, s2 = plan.slots
    assert s0.base == ("adj", 0) and s0.steps == ()
    assert s1.base == ("slot", 0) and s1.steps == (("intersect", ("adj", 1)),)
    # the depth-3 intersection reads the pruned lists, not raw adjacency
    assert s2.base == ("slot", 1)
    assert s2.steps == (("intersect", ("aux", 0, 2)),)
    (d,) = plan.directives
    assert (d.depth, d.selecting_slot, d.filtering_slot) == (1, 0, 0)
    assert d.target_uses == ((3, 3),)
    assert d.build_source == "graph"
    assert d.strategy_gate == "always"
    assert plan.loops[0].aux_after == (0,)


def test_clique4_scheduled_plan_bound_push():
    q = pool_query("clique4")
    sched = build_schedule(q)
    assert sched.restrictions == ((0, 1), (1, 3), (2, 0))
    plan = compile_plan(q, sched, "eager")
    # (2, 0) pushes an upper bound into position 2's candidate set, which
    # splits it from the unbounded depth-2 prefix of position 3
    assert len(plan.slots) == 4
    assert plan.slots[1].bound == (0, "upper")
    assert plan.slots[2].bound is None
    assert [plan.candidate_slot_id(i) for i in range(4)] == [None, 0, 1, 3]
    (d,) = plan.directives
    assert d.target_uses == ((3, 3),)
    assert d.card_loops == ((0, ()), (0, ("p2",)))


def test_clique5_reuse_chain():
    q = pool_query("clique5")
    plan = compile_plan(q, build_schedule(q), "eager")
    assert len(plan.slots) == 5
    d0, d1 = plan.directives
    assert (d0.depth, d0.selecting_slot, d0.filtering_slot) == (1, 0, 0)
    assert d0.target_uses == ((3, 3), (3, 4), (4, 4))
    assert d0.build_source == "graph"
    assert (d1.depth, d1.selecting_slot, d1.filtering_slot) == (2, 2, 2)
    assert d1.target_uses == ((4, 4),)
    assert d1.build_source == 0  # refined from the depth-1 lists
    assert d0.card_loops == ((0, ()), (0, ("p2",)))
    assert d1.card_loops == ((1, ()), (2, ("p2",)))
    assert [lp.aux_after for lp in plan.loops] == [(0,), (1,), (), (), ()]
    # deepest directive wins the (4, 4) site; the chain tail feeds slot 4
    assert plan.slots[3].steps == (("intersect", ("aux", 0, 2)),)
    assert plan.slots[4].steps == (("intersect", ("aux", 1, 3)),)


def test_clique5_discovery_and_dedup():
    q = pool_query("clique5")
    sched = build_schedule(q)
    logical = plan_prefix_sets(q, sched)
    raw = find_aux_directives(q, sched, logical)
    # sites (h=1,k=3,i=3), (1,3,4), (1,4,4), (2,4,4)
    assert len(raw) == 4
    merged = dedup_aux_directives(raw)
    assert len(merged) == 2
    assert merged[0].target_uses == ((3, 3), (3, 4), (4, 4))


@pytest.mark.parametrize("name", ["triangle", "path4"])
def test_small_queries_have_no_directives(name):
    q = pool_query(name)
    plan = compile_plan(q, build_schedule(q), "eager")
    assert plan.directives == ()
    assert len(plan.slots) == 2


def test_star_edge_variant_single_slot_no_directives():
    q = pool_query("star4")
    plan = compile_plan(q, build_schedule(q), "eager")
    assert plan.directives == ()
    assert len(plan.slots) == 1
    # leaves carry the center's adjacency forward unchanged
    assert all(plan.candidate_slot_id(p) == 0 for p in range(1, 4))


def test_star_vertex_variant_prunes_a_subtract_operand():
    q = pool_query("star4")
    plan = compile_plan(q, build_schedule(q, variant="vertex"), "eager")
    (d,) = plan.directives
    assert d.depth == 1 and d.target_uses == ((3, 3),)
    assert plan.slots[2].steps == (("subtract", ("aux", 0, 2)),)


def test_strategy_none_strips_directives():
    q = pool_query("clique5")
    plan = compile_plan(q, build_schedule(q), "none")
    assert plan.directives == ()
    for s in plan.slots:
        for _, operand in s.steps:
            assert operand[0] != "aux"


def test_strategy_gate_values():
    q = pool_query("clique4")
    sched = build_schedule(q)
    eager = compile_plan(q, sched, "eager")
    online = compile_plan(q, sched, "online")
    assert all(d.strategy_gate == "always" for d in eager.directives)
    assert all(d.strategy_gate == "cost-model" for d in online.directives)
    with pytest.raises(PlanError):
        compile_plan(q, sched, "static")


def test_prefix_slots_share_physical_ids():
    q = pool_query("clique4")
    logical = plan_prefix_sets(q, chain_schedule_k4())
    by_alias = {(ps.target, ps.depth): ps.slot_id for ps in logical}
    # depth-1 prefixes of every later target are the same program
    assert by_alias[(1, 1)] == by_alias[(2, 1)] == by_alias[(3, 1)]
    # (2,2) and (3,2) share because no bound separates them here
    assert by_alias[(2, 2)] == by_alias[(3, 2)]


def test_card_tags_wedge_detection():
    q = pool_query("clique4")
    assert card_tags(q, (0, 1, 2, 3), 2, 1) == ("p2",)
    assert card_tags(q, (0, 1, 2, 3), 3, 1) == ("p2", "p2")
    # a tree edge with no earlier wedge stays p1
    path = pool_query("path4")
    assert card_tags(path, (0, 1, 2, 3), 1, 0) == ("p1",)


def test_schedule_validation_errors():
    q = pool_query("clique4")
    with pytest.raises(PlanError):
        compile_plan(q, Schedule(order=(0, 1, 2), restrictions=()), "none")
    with pytest.raises(PlanError):
        compile_plan(q, Schedule(order=(0, 0, 1, 2), restrictions=()), "none")
    with pytest.raises(PlanError):
        compile_plan(
            q, Schedule(order=(0, 1, 2, 3), restrictions=((0, 1), (1, 0))), "none"
        )
    path = pool_query("path4")
    with pytest.raises(PlanError):
        # 0 and 2 are not adjacent in the path, so position 1 has no earlier
        # neighbor under this order
        compile_plan(path, Schedule(order=(0, 2, 1, 3), restrictions=()), "none")


def test_validate_plan_rejects_tampering():
    q = pool_query("clique4")
    plan = compile_plan(q, build_schedule(q), "eager")
    (d,) = plan.directives
    deep = replace(plan, directives=(replace(d, depth=4),))
    with pytest.raises(PlanError):
        validate_plan(deep)
    bad_loop = replace(
        plan,
        loops=plan.loops[:1]
        + (replace(plan.loops[1], slots_after=(plan.slots[-1].id,)),)
        + plan.loops[2:],
    )
    with pytest.raises(PlanError):
        validate_plan(bad_loop)


def test_plan_json_deterministic():
    q = pool_query("clique5")
    plan = compile_plan(q, build_schedule(q), "online")
    text = plan_to_json(plan)
    assert text == plan_to_json(plan)
    doc = json.loads(text)
    assert {d["gate"] for d in doc["directives"]} == {"cost-model"}
