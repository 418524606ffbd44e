from __future__ import annotations

import os
import stat
from pathlib import Path

import pytest

from condplan import (
    asp,
    emit,
    gen_bts,
    kitchen_lite_text,
    parse,
    run_external,
)
from condplan.asp import (
    EmitError,
    SolvedAction,
    SolverOutputError,
    SolverUnavailable,
    Unsatisfiable,
)

GOLDEN = Path(__file__).parent / "golden"


def _program(text, **kw):
    unit = parse(text)
    return emit(unit.domain, unit.problem, **kw)


def _flat(text: str) -> str:
    """Undo line wrapping: continuation lines are indented two spaces."""
    out = []
    for line in text.splitlines():
        if line.startswith("  ") and out:
            out[-1] += " " + line.strip()
        else:
            out.append(line)
    return "\n".join(out)


@pytest.fixture(scope="module")
def bts2():
    return _program(gen_bts(2))


@pytest.fixture(scope="module")
def kitchen():
    return _program(kitchen_lite_text())


def test_bts2_matches_golden(bts2):
    assert bts2.combined == (GOLDEN / "bts2.lp").read_text()


def test_kitchen_matches_golden(kitchen):
    assert kitchen.combined == (GOLDEN / "kitchen_lite.lp").read_text()


def test_emission_deterministic():
    a = _program(kitchen_lite_text()).combined
    b = _program(kitchen_lite_text()).combined
    assert a == b


def test_parts_assemble_in_order(bts2):
    c = bts2.combined
    assert c.count("#program base.") == 1
    assert c.count("#program step(t).") == 1
    assert c.count("#program check(t).") == 1
    assert bts2.base in c and bts2.step in c and bts2.check in c
    assert c.index(bts2.base) < c.index(bts2.step) < c.index(bts2.check)
    assert c.startswith("#include <incmode>.")
    assert "#const time_min=0." in c
    assert bts2.occurrences == ("dunk",)


def test_step_limit_parameter():
    prog = _program(gen_bts(2), step_limit=7)
    assert "#const step_limit=7." in prog.combined
    assert "#const step_limit=40." not in prog.combined


# one assertion block per rule family of the encoding
def test_bts2_rule_families(bts2):
    f = _flat(bts2.combined)
    # object and value domains
    assert "pkg(p1;p2)." in f
    assert "dom_has_bomb(true;false)." in f
    assert "#const dom_has_bomb_size=2." in f
    # initial knowledge
    assert "armed(true,time_min)." in f
    # value uniqueness propagation (negative from positive)
    assert (
        "-has_bomb(X1,V,time_min) :- has_bomb(X1,V1,time_min), pkg(X1), "
        "dom_has_bomb(V), dom_has_bomb(V1), V!=V1." in f
    )
    # all-but-one promotion
    assert (
        "has_bomb(X1,V,time_min) :- dom_has_bomb_size-1{-has_bomb(X1,V1,time_min):"
        "dom_has_bomb(V1),V1!=V}dom_has_bomb_size-1, pkg(X1), dom_has_bomb(V)." in f
    )
    # exactly-one constraint: sibling exclusion and last-candidate promotion
    assert (
        "-has_bomb(X1,true,time_min) :- has_bomb(Y1,true,time_min), pkg(X1), "
        "pkg(Y1), X1!=Y1." in f
    )
    assert (
        "has_bomb(X1,true,time_min) :- "
        "1{-has_bomb(Y1,true,time_min):pkg(Y1),Y1!=X1}1, pkg(X1)." in f
    )
    # occurrence choices, first step and later steps
    assert "{dunk(P,time_min)} :- pkg(P)." in f
    assert "{sense(has_bomb(P),time_min)} :- pkg(P)." in f
    assert "{dunk(P,t+time_min)} :- pkg(P)." in f
    # inertia pair
    assert (
        "armed(V,t+time_min) :- not -armed(V,t+time_min), armed(V,t+time_min-1), "
        "dom_armed(V)." in f
    )
    assert (
        "-armed(V,t+time_min) :- not armed(V,t+time_min), -armed(V,t+time_min-1), "
        "dom_armed(V)." in f
    )
    # actuation effect
    assert "armed(false,t+time_min) :- dunk(P,t+time_min-1), pkg(P)." in f
    # sensing outcome generation
    assert (
        "1{has_bomb(P,V,t+time_min):dom_has_bomb(V)}1 :- "
        "sense(has_bomb(P),t+time_min-1), pkg(P)." in f
    )
    # state consistency: at most one value; existence for full fluents only
    assert ":- 2{has_bomb(X1,V,t+time_min):dom_has_bomb(V)}, pkg(X1)." in f
    assert ":- {armed(V,t+time_min):dom_armed(V)}0." in f
    assert ":- {has_bomb" not in f
    # constraint integrity at every step
    assert ":- 2{has_bomb(P1,true,t+time_min):pkg(P1)}." in f
    assert ":- 2{-has_bomb(P1,true,t+time_min):pkg(P1)}." in f
    # precondition as a negated knowledge test
    assert ":- dunk(P,t+time_min), pkg(P), not has_bomb(P,true,t+time_min)." in f
    # sensing a known value is pointless and forbidden
    assert (
        ":- sense(has_bomb(P),t+time_min), pkg(P), "
        "1{has_bomb(P,V,t+time_min):dom_has_bomb(V)}." in f
    )
    # actuation/sensing exclusivity and at-most-one-per-kind
    assert "actAction(t+time_min) :- dunk(P,t+time_min), pkg(P)." in f
    assert ":- actAction(t+time_min), sensAction(t+time_min)." in f
    assert ":- 2{dunk(P_1,t+time_min):pkg(P_1)}." in f
    assert ":- 2{sense(has_bomb(P_1),t+time_min):pkg(P_1)}." in f
    # goal and query wiring
    assert "#external query(t)." in f
    assert "goal(t+time_min) :- armed(false,t+time_min)." in f
    assert ":- query(t), not goal(t+time_min)." in f
    # sensing minimization
    assert ":~ sensAction(t+time_min). [2@2,t]" in f


def test_kitchen_rule_families(kitchen):
    f = _flat(kitchen.combined)
    # closed-world defaults at the initial step only
    assert (
        "-at_obj(O,left,time_min) :- not at_obj(O,left,time_min), obj(O)." in f
    )
    assert "-at_obj(O,left,t+time_min)" not in f.split("#program step(t).")[1]
    # negative (!=) precondition
    assert (
        ":- goto(F,T,t+time_min), loc(F), loc(T), not -at_robot(T,t+time_min)."
        in f
    )
    # feasibility as an external function test
    assert ":- goto(F,T,t+time_min), loc(F), loc(T), @route_ok(F,T)!=1." in f
    # sensing precondition over a parameter the target does not bind
    # collapses to an existence test
    assert (
        ":- sense(clean(O),t+time_min), obj(O), "
        "{at_obj(O,M1,t+time_min):manip(M1)}0." in f
    )
    # 0-ary fluent sensing occurrence has no guard
    assert "{sense(requested,time_min)}." in f
    assert (
        "1{requested(V,t+time_min):dom_requested(V)}1 :- "
        "sense(requested,t+time_min-1)." in f
    )
    assert kitchen.occurrences == (
        "goto", "pickup", "placeon", "clean_obj", "serve_soup", "serve_cereal",
    )


def test_wrapped_lines_stay_narrow(bts2, kitchen):
    for prog in (bts2, kitchen):
        over = [
            ln for ln in prog.combined.splitlines()
            if len(ln) > 90 and "{" not in ln
        ]
        assert not over


def test_two_sensing_schemas_for_one_fluent_rejected():
    text = """\
sort pkg = { p1 }
fluent f(pkg) : { a, b } partial
fluent g : { true, false } full
sense s1(P: pkg) -> f(P)
sense s2(P: pkg) -> f(P)
action go
  eff g := true
init g = false
goal g = true
"""
    unit = parse(text)
    with pytest.raises(EmitError, match="two sensing actions observe f"):
        emit(unit.domain, unit.problem)


def test_knownness_test_on_unbound_parameter_rejected():
    text = """\
sort obj = { o1 }
sort manip = { m1 }
fluent pos(obj) : { a, b } partial
fluent aux(manip) : { x, y } partial
fluent g : { true, false } full
sense watch(O: obj, M: manip) -> pos(O)
  pre known aux(M)
action go
  eff g := true
init g = false
goal g = true
"""
    unit = parse(text)
    with pytest.raises(EmitError):
        emit(unit.domain, unit.problem)


# ---------------------------------------------------------------------
# external solver bridge, exercised with stand-in executables


def _script(tmp_path, body: str) -> str:
    p = tmp_path / "solver"
    p.write_text("#!/bin/sh\n" + body)
    os.chmod(p, os.stat(p).st_mode | stat.S_IXUSR)
    return str(p)


def test_bridge_collects_occurrences(bts2, tmp_path):
    path = _script(
        tmp_path,
        'cat > /dev/null\n'
        'echo "clingo version 5.x"\n'
        'echo "Solving..."\n'
        'echo "Answer: 1"\n'
        'echo "sense(has_bomb(p1),0) has_bomb(p1,true,1) dunk(p1,1) armed(false,2)"\n'
        'echo "SATISFIABLE"\n',
    )
    acts = run_external(bts2, solver_path=path)
    assert acts == [
        SolvedAction("sense", ("has_bomb(p1)",), 0),
        SolvedAction("dunk", ("p1",), 1),
    ]


def test_bridge_rewrites_step_limit(bts2, tmp_path):
    dump = tmp_path / "seen.lp"
    path = _script(tmp_path, f'cat > "{dump}"\necho "dunk(p1,0)"\n')
    run_external(bts2, solver_path=path, max_steps=13)
    text = dump.read_text()
    assert "#const step_limit=13." in text
    assert "#const step_limit=40." not in text


def test_bridge_unsatisfiable(bts2, tmp_path):
    path = _script(tmp_path, 'cat > /dev/null\necho "UNSATISFIABLE"\nexit 20\n')
    with pytest.raises(Unsatisfiable):
        run_external(bts2, solver_path=path)


def test_bridge_malformed_output(bts2, tmp_path):
    path = _script(tmp_path, 'cat > /dev/null\necho "dunk(p1,"\n')
    with pytest.raises(SolverOutputError, match="malformed"):
        run_external(bts2, solver_path=path)


def test_bridge_occurrence_without_time(bts2, tmp_path):
    path = _script(tmp_path, 'cat > /dev/null\necho "dunk(p1)"\n')
    with pytest.raises(SolverOutputError, match="time step"):
        run_external(bts2, solver_path=path)


def test_bridge_solver_missing(bts2, tmp_path, monkeypatch):
    with pytest.raises(SolverUnavailable):
        run_external(bts2, solver_path=str(tmp_path / "nope"))
    monkeypatch.delenv(asp.SOLVER_ENV, raising=False)
    with pytest.raises(SolverUnavailable, match="no solver configured"):
        run_external(bts2)


def test_bridge_env_var(bts2, tmp_path, monkeypatch):
    path = _script(tmp_path, 'cat > /dev/null\necho "dunk(p2,3)"\n')
    monkeypatch.setenv(asp.SOLVER_ENV, path)
    assert run_external(bts2) == [SolvedAction("dunk", ("p2",), 3)]
