from __future__ import annotations

import pytest

from condplan import (
    EngineError,
    build,
    gen_bts,
    ground,
    initial_belief,
    parse,
    verify,
)
from condplan.belief import goal_conditions, goal_holds
from condplan.engine import ActNode, ConditionalPlan, SenseNode
from condplan.verify import (
    CYCLE_DETECTED,
    GOAL_UNREACHED,
    ILLEGAL_OUTCOME_EDGE,
    PRECONDITION_VIOLATED,
    UNCOVERED_OUTCOME,
    enumerate_branches,
)
from mutations import drop_outcome_edge, swap_outcome_labels, truncate_branch


def _plan_for(text):
    unit = parse(text)
    model = ground(unit.domain)
    result = build(model, unit.problem)
    assert result.ok
    return result.plan, initial_belief(model, unit.problem)


def _kinds(res):
    return {v.kind for v in res.violations}


def test_engine_output_verifies():
    plan, init = _plan_for(gen_bts(5))
    res = verify(plan, init)
    assert res.ok
    assert res.leaves == 5
    assert res.complete


def test_empty_plan_requires_satisfied_goal():
    unit = parse(gen_bts(3))
    model = ground(unit.domain)
    init = initial_belief(model, unit.problem)
    goal = tuple(goal_conditions(model, unit.problem))
    bogus = ConditionalPlan(model, goal, None)
    res = verify(bogus, init)
    assert not res.ok
    assert _kinds(res) == {GOAL_UNREACHED}
    assert res.violations[0].path == ()


def test_dropped_outcome_edge_flagged():
    plan, init = _plan_for(gen_bts(3))
    assert drop_outcome_edge(plan)
    res = verify(plan, init)
    assert not res.ok
    assert UNCOVERED_OUTCOME in _kinds(res)


def test_swapped_outcome_labels_flagged():
    plan, init = _plan_for(gen_bts(3))
    assert swap_outcome_labels(plan)
    res = verify(plan, init)
    assert not res.ok
    assert PRECONDITION_VIOLATED in _kinds(res)


def test_truncated_branch_flagged():
    plan, init = _plan_for(gen_bts(4))
    assert truncate_branch(plan)
    res = verify(plan, init)
    assert not res.ok
    assert GOAL_UNREACHED in _kinds(res)


def test_truncation_of_single_action_plan():
    plan, init = _plan_for(gen_bts(1))  # no sensing: bomb location forced
    assert not drop_outcome_edge(plan)
    assert not swap_outcome_labels(plan)
    assert truncate_branch(plan)
    res = verify(plan, init)
    assert _kinds(res) == {GOAL_UNREACHED}


PAINT = """\
sort s = { a }
fluent paint : { red, green, blue } partial
fluent done : { true, false } full
constraint atmost 0 { paint = red }
sense look -> paint
action finish
  pre paint != red
  eff done := true
init done = false
goal done = true
"""


def test_edge_for_excluded_outcome_flagged():
    unit = parse(PAINT)
    model = ground(unit.domain)
    goal = tuple(goal_conditions(model, unit.problem))
    finish = model.action_by_key["finish"]
    root = SenseNode(model.sensing_by_key["look"])
    for o in ("red", "green", "blue"):
        root.edges[o] = ActNode((finish,))
    plan = ConditionalPlan(model, goal, root)
    res = verify(plan, initial_belief(model, unit.problem))
    assert _kinds(res) == {ILLEGAL_OUTCOME_EDGE}
    assert res.leaves == 2  # green/blue replay fine, red can't happen
    assert not res.ok


def test_cycle_flagged_and_not_measured():
    text = """\
sort s = { a }
fluent done : { true, false } full
action finish
  eff done := true
init done = false
goal done = true
"""
    unit = parse(text)
    model = ground(unit.domain)
    goal = tuple(goal_conditions(model, unit.problem))
    loop = ActNode((model.action_by_key["finish"],))
    loop.child = loop
    plan = ConditionalPlan(model, goal, loop)
    res = verify(plan, initial_belief(model, unit.problem))
    assert _kinds(res) == {CYCLE_DETECTED}
    with pytest.raises(EngineError):
        plan.stats


def test_leaf_cap_marks_incomplete():
    plan, init = _plan_for(gen_bts(4))
    res = verify(plan, init, max_leaves=2)
    assert not res.complete
    assert not res.ok
    assert res.leaves == 3  # the leaf that tripped the cap is counted


def test_enumerate_branches_bts():
    plan, init = _plan_for(gen_bts(3))
    branches = list(enumerate_branches(plan, init))
    assert len(branches) == 3
    paths = [p for p, _ in branches]
    assert paths[0] == ("probe(p1)=true", "dunk(p1)")
    for _, final in branches:
        assert goal_holds(final, plan.goal)
    assert len(list(enumerate_branches(plan, init, limit=1))) == 1
