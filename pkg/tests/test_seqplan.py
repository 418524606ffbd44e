from __future__ import annotations

import pytest

from condplan import (
    FeasibilityRegistry,
    OracleBudgetExceeded,
    SearchMemo,
    brute_force_plan,
    find_plan,
    gen_bts,
    gen_colorball,
    gen_doors,
    goal_conditions,
    ground,
    initial_belief,
    kitchen_lite_text,
    kitchen_routes_path,
    parse,
    register_lookup,
)
from condplan.seqplan import Act, Sense, TaskConstraint
from conftest import TWO_PKG


def _routes_registry():
    reg = FeasibilityRegistry()
    register_lookup(reg, kitchen_routes_path())
    return reg


def _doors_registry(n):
    def make():
        from condplan.benchmarks import doors_evaluator

        reg = FeasibilityRegistry()
        reg.register("reach", doors_evaluator(n))
        return reg

    return make


def _setup(text, registry_factory=None):
    unit = parse(text)
    model = ground(unit.domain)
    b0 = initial_belief(model, unit.problem)
    goal = goal_conditions(model, unit.problem)
    feas = registry_factory() if registry_factory else None
    return model, b0, goal, feas


# (label, text, feasibility registry factory)
MATRIX = (
    [(f"bts{m}", gen_bts(m), None) for m in range(1, 7)]
    + [
        ("colorball21", gen_colorball(2, 1), None),
        ("doors3", gen_doors(3), _doors_registry(3)),
        ("kitchen", kitchen_lite_text(), _routes_registry),
    ]
)


@pytest.mark.parametrize(
    "label,text,registry", MATRIX, ids=[m[0] for m in MATRIX]
)
def test_matches_brute_force(label, text, registry):
    model, b0, goal, feas = _setup(text, registry)
    got = find_plan(model, b0, goal, feas=feas)
    want = brute_force_plan(model, b0, goal, feas=feas)
    assert (got is None) == (want is None)
    if got is not None:
        gp, wp = got[0], want[0]
        assert gp.makespan == wp.makespan, label
        assert gp.sensing_count == wp.sensing_count, label


def test_deterministic_output():
    model, b0, goal, _ = _setup(gen_colorball(2, 1))
    a = find_plan(model, b0, goal)
    b = find_plan(model, b0, goal)
    assert [s.key for s in a[0].steps] == [s.key for s in b[0].steps]


def test_empty_plan_when_goal_already_holds():
    text = TWO_PKG.replace("goal armed = false", "goal armed = true")
    model, b0, goal, _ = _setup(text)
    res = find_plan(model, b0, goal)
    assert res is not None
    plan, hist = res
    assert plan.steps == ()
    assert hist.beliefs == (b0,)


def test_unreachable_goal_returns_none():
    text = """\
sort s = { a }
fluent lit : { true, false } full
init lit = false
goal lit = true
"""
    model, b0, goal, _ = _setup(text)
    assert find_plan(model, b0, goal) is None
    assert brute_force_plan(model, b0, goal) is None


def test_plans_end_with_actuation_and_lex_tiebreak():
    # two interchangeable finishing actions; declaration order says b first
    # but the tie must fall to the lexicographically smaller key
    text = """\
sort s = { a }
fluent done : { true, false } full
action doit_b
  eff done := true
action doit_a
  eff done := true
init done = false
goal done = true
"""
    model, b0, goal, _ = _setup(text)
    plan, _ = find_plan(model, b0, goal)
    assert plan.makespan == 1
    (step,) = plan.steps
    assert isinstance(step, Act)
    assert step.key == "act:doit_a"


def test_forced_first_step_counts_toward_makespan():
    model, b0, goal, _ = _setup(TWO_PKG)
    probe1 = model.sensings[0]
    res = find_plan(
        model, b0, goal, constraint=TaskConstraint(probe1, "true")
    )
    plan, hist = res
    first = plan.steps[0]
    assert isinstance(first, Sense)
    assert first.sensing is probe1 and first.outcome == "true"
    # sense p1=true pins the bomb: dunk it and stop
    assert plan.makespan == 2
    assert len(hist.beliefs) == 3


def test_singleton_family_needs_no_sensing():
    model, b0, goal, _ = _setup(gen_bts(1))
    plan, _ = find_plan(model, b0, goal)
    assert plan.makespan == 1
    assert plan.sensing_count == 0


def test_minimize_sensing_toggle_keeps_makespan():
    model, b0, goal, _ = _setup(gen_bts(3))
    on, _ = find_plan(model, b0, goal, minimize_sensing=True)
    off, _ = find_plan(model, b0, goal, minimize_sensing=False)
    assert on.makespan == off.makespan
    assert on.sensing_count <= off.sensing_count


def test_shared_memo_matches_fresh_runs():
    model, b0, goal, _ = _setup(gen_colorball(2, 1))
    memo = SearchMemo.for_start(model, b0, goal)
    fresh_root = find_plan(model, b0, goal)
    memo_root = find_plan(model, b0, goal, memo=memo)
    assert [s.key for s in fresh_root[0].steps] == [
        s.key for s in memo_root[0].steps
    ]
    # a follow-up query through the same memo must also match a fresh run
    look = next(s for s in model.sensings if s.key.startswith("look"))
    con = TaskConstraint(look, "true")
    fresh_b = find_plan(model, b0, goal, constraint=con)
    memo_b = find_plan(model, b0, goal, constraint=con, memo=memo)
    assert (fresh_b is None) == (memo_b is None)
    if fresh_b is not None:
        assert [s.key for s in fresh_b[0].steps] == [
            s.key for s in memo_b[0].steps
        ]


def test_pruning_bound_never_changes_plans():
    for text, registry in [
        (TWO_PKG, None),
        (gen_doors(3), _doors_registry(3)),
        (kitchen_lite_text(), _routes_registry),
    ]:
        model, b0, goal, feas = _setup(text, registry)
        with_bound = SearchMemo.for_start(model, b0, goal, feas=feas)
        without = SearchMemo.for_start(
            model, b0, goal, feas=feas, use_bound=False
        )
        a = find_plan(model, b0, goal, feas=feas, memo=with_bound)
        b = find_plan(model, b0, goal, feas=feas, memo=without)
        assert [s.key for s in a[0].steps] == [s.key for s in b[0].steps]


def test_oracle_budget_guard():
    model, b0, goal, _ = _setup(gen_bts(6))
    with pytest.raises(OracleBudgetExceeded):
        brute_force_plan(model, b0, goal, explored_cap=5)
