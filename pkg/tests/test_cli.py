from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from condplan import gen_bts, kitchen_lite_path, kitchen_routes_path
from condplan.cli import main

GOLDEN = Path(__file__).parent / "golden"

STATS_KEYS = [
    "tree_size",
    "dag_size",
    "max_depth",
    "sensing_nodes",
    "leaves",
    "time_seconds",
    "cache_hits",
    "efficiency",
]


@pytest.fixture()
def bts3_file(tmp_path):
    path = tmp_path / "bts3.hcp"
    assert main(["gen", "bts", "--m", "3", "--out", str(path)]) == 0
    return str(path)


def test_gen_matches_library(bts3_file):
    assert Path(bts3_file).read_text() == gen_bts(3)


def test_gen_to_stdout(capsys):
    assert main(["gen", "doors", "--n", "3"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# hidden doors, 3x3 grid")


def test_gen_missing_size(capsys):
    assert main(["gen", "bts"]) == 2
    assert "requires --m" in capsys.readouterr().err


def test_pipeline_gen_plan_verify(bts3_file, tmp_path, capsys):
    plan_path = tmp_path / "plan.json"
    stats_path = tmp_path / "stats.json"
    rc = main(
        [
            "plan",
            "--domain", bts3_file,
            "--out", str(plan_path),
            "--stats", str(stats_path),
        ]
    )
    assert rc == 0
    stats = json.loads(stats_path.read_text())
    assert list(stats) == STATS_KEYS
    assert stats["tree_size"] == 5 and stats["max_depth"] == 3

    rc = main(["verify", "--domain", bts3_file, "--plan", str(plan_path)])
    assert rc == 0
    assert "ok: 3 branch(es) reach the goal" in capsys.readouterr().out


def test_plan_stdout_json_summary_stderr(bts3_file, capsys):
    assert main(["plan", "--domain", bts3_file]) == 0
    cap = capsys.readouterr()
    doc = json.loads(cap.out)
    assert doc["root"] == 0
    assert "tree_size=5" in cap.err


def test_plan_dot_format(bts3_file, tmp_path):
    out = tmp_path / "plan.dot"
    rc = main(["plan", "--domain", bts3_file, "--format", "dot", "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert text.startswith("digraph plan {")
    assert "shape=diamond" in text


def test_missing_domain_file(capsys, tmp_path):
    assert main(["plan", "--domain", str(tmp_path / "ghost.hcp")]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_parse_error_maps_to_input(tmp_path, capsys):
    bad = tmp_path / "bad.hcp"
    bad.write_text("sort Pkg = { P1 }\n")
    assert main(["plan", "--domain", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_domain_without_problem(tmp_path, capsys):
    dom = tmp_path / "dom.hcp"
    dom.write_text(
        "sort s = { a }\nfluent f : { true, false } full\n"
        "action go\n  eff f := true\n"
    )
    assert main(["plan", "--domain", str(dom)]) == 2
    assert "no init/goal" in capsys.readouterr().err


def test_split_domain_and_problem(tmp_path):
    dom = tmp_path / "dom.hcp"
    prob = tmp_path / "prob.hcp"
    lines = gen_bts(2).splitlines(keepends=True)
    dom.write_text("".join(l for l in lines if not l.startswith(("init", "goal"))))
    prob.write_text("".join(l for l in lines if l.startswith(("init", "goal"))))
    rc = main(["plan", "--domain", str(dom), "--problem", str(prob)])
    assert rc == 0


def test_missing_evaluator_reported(tmp_path, capsys):
    doors = tmp_path / "doors.hcp"
    assert main(["gen", "doors", "--n", "3", "--out", str(doors)]) == 0
    assert main(["plan", "--domain", str(doors)]) == 2
    err = capsys.readouterr().err
    assert "reach" in err and "--lookup or --grid" in err


def test_grid_flag_wires_doors(tmp_path):
    doors = tmp_path / "doors.hcp"
    plan_path = tmp_path / "plan.json"
    assert main(["gen", "doors", "--n", "3", "--out", str(doors)]) == 0
    rc = main(
        [
            "plan",
            "--domain", str(doors),
            "--grid", "reach=3x3,c1_0,c1_1,c1_2",
            "--out", str(plan_path),
        ]
    )
    assert rc == 0
    rc = main(
        [
            "verify",
            "--domain", str(doors),
            "--grid", "reach=3x3,c1_0,c1_1,c1_2",
            "--plan", str(plan_path),
        ]
    )
    assert rc == 0


@pytest.mark.parametrize("spec", ["reach", "reach=banana", "reach=3xq"])
def test_bad_grid_spec(tmp_path, capsys, spec):
    doors = tmp_path / "doors.hcp"
    assert main(["gen", "doors", "--n", "3", "--out", str(doors)]) == 0
    assert main(["plan", "--domain", str(doors), "--grid", spec]) == 2
    assert "bad --grid spec" in capsys.readouterr().err


def test_lookup_flag_wires_kitchen(tmp_path):
    plan_path = tmp_path / "plan.json"
    rc = main(
        [
            "plan",
            "--domain", kitchen_lite_path(),
            "--lookup", kitchen_routes_path(),
            "--out", str(plan_path),
        ]
    )
    assert rc == 0
    assert json.loads(plan_path.read_text())["stats"]["tree_size"] == 45


def test_unsolvable_goal_exit1(tmp_path, capsys):
    dom = tmp_path / "stuck.hcp"
    dom.write_text(
        "sort s = { a }\n"
        "fluent lit : { true, false } full\n"
        "fluent hidden : { x, y } partial\n"
        "sense peek -> hidden\n"
        "action win\n  pre hidden = x\n  eff lit := true\n"
        "init lit = false\n"
        "goal lit = true\n"
    )
    assert main(["plan", "--domain", str(dom)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("Failure:")
    assert "= y" in err


def test_verify_flags_mutated_plan(bts3_file, tmp_path, capsys):
    plan_path = tmp_path / "plan.json"
    assert main(["plan", "--domain", bts3_file, "--out", str(plan_path)]) == 0
    doc = json.loads(plan_path.read_text())
    sense = doc["nodes"][0]
    assert sense["kind"] == "sense"
    a, b = sense["children"][0], sense["children"][1]
    a["id"], b["id"] = b["id"], a["id"]
    mutated = tmp_path / "mutated.json"
    mutated.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["verify", "--domain", bts3_file, "--plan", str(mutated)]) == 3
    assert "violation:" in capsys.readouterr().err


def test_verify_missing_plan_file(bts3_file, capsys):
    assert main(["verify", "--domain", bts3_file, "--plan", "/no/such.json"]) == 2
    assert "cannot read plan file" in capsys.readouterr().err


def test_verify_rejects_garbage_plan(bts3_file, tmp_path, capsys):
    garbage = tmp_path / "garbage.json"
    garbage.write_text('{"hello": 1}')
    assert main(["verify", "--domain", bts3_file, "--plan", str(garbage)]) == 2
    assert "error:" in capsys.readouterr().err


def test_emit_matches_golden(tmp_path):
    bts2 = tmp_path / "bts2.hcp"
    out = tmp_path / "bts2.lp"
    assert main(["gen", "bts", "--m", "2", "--out", str(bts2)]) == 0
    assert main(["emit", "--domain", str(bts2), "--out", str(out)]) == 0
    assert out.read_bytes() == (GOLDEN / "bts2.lp").read_bytes()


def test_emit_step_limit(tmp_path, capsys):
    bts2 = tmp_path / "bts2.hcp"
    assert main(["gen", "bts", "--m", "2", "--out", str(bts2)]) == 0
    assert main(["emit", "--domain", str(bts2), "--max-steps", "9"]) == 0
    assert "#const step_limit=9." in capsys.readouterr().out


def test_threads_do_not_change_deterministic_stats(bts3_file, tmp_path):
    seen = []
    for threads in ("1", "8"):
        stats_path = tmp_path / f"s{threads}.json"
        rc = main(
            [
                "plan",
                "--domain", bts3_file,
                "--threads", threads,
                "--deterministic", "on",
                "--out", str(tmp_path / f"p{threads}.json"),
                "--stats", str(stats_path),
            ]
        )
        assert rc == 0
        stats = json.loads(stats_path.read_text())
        seen.append({k: v for k, v in stats.items()
                     if k not in ("time_seconds", "efficiency")})
    assert seen[0] == seen[1]


def test_missing_required_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["plan"])
    assert exc.value.code == 2


def test_module_and_console_entry_points(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "condplan", "gen", "bts", "--m", "2"],
        capture_output=True, text=True,
    )
    assert r.returncode == 0
    assert r.stdout == gen_bts(2)
    r = subprocess.run(["condplan", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for word in ("plan", "verify", "gen", "emit"):
        assert word in r.stdout
