"""Command-line front door: plan, verify, generate benchmarks, emit programs.

Exit codes are stable and scripted against:

  0  success
  1  planning failure (the goal is unreachable under some outcome)
  2  input error (bad flags, missing files, parse or validation errors)
  3  verification failure
  4  internal error

``plan`` writes the conditional plan to ``--out`` (default stdout) in DOT
or JSON form and a stats block ``{tree_size, dag_size, max_depth,
sensing_nodes, leaves, time_seconds, cache_hits, efficiency}`` to
``--stats``; without ``--stats`` a one-line summary goes to stderr so
stdout stays machine-readable.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import asp, benchmarks, export
from .belief import (
    InconsistentBelief,
    goal_conditions,
    initial_belief,
)
from .engine import EngineConfig, build
from .feasibility import (
    FeasibilityRegistry,
    LookupFormatError,
    UnknownPredicate,
    make_grid_path,
    register_lookup,
)
from .lang import ParseError, ParsedUnit, load_files
from .model import FEASIBLE, GroundingError, ground
from .verify import verify

EXIT_OK = 0
EXIT_NO_PLAN = 1
EXIT_INPUT = 2
EXIT_VERIFY = 3
EXIT_INTERNAL = 4


class InputError(Exception):
    """User-facing input problem; mapped to exit code 2."""


def _on_off(text: str) -> bool:
    if text == "on":
        return True
    if text == "off":
        return False
    raise argparse.ArgumentTypeError(f"expected 'on' or 'off', got {text!r}")


def _add_domain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", required=True, help="domain file (.hcp)")
    p.add_argument(
        "--problem",
        help="problem file; optional when the domain file also carries "
        "init/goal statements",
    )
    p.add_argument(
        "--lookup",
        action="append",
        default=[],
        metavar="PATH",
        help="feasibility lookup table; registers one evaluator per "
        "predicate named in the file (repeatable)",
    )
    p.add_argument(
        "--grid",
        action="append",
        default=[],
        metavar="SPEC",
        help="grid reachability evaluator, SPEC = name=WxH[,blocked_cell...]"
        " e.g. reach=5x5,c1_0,c1_2 (repeatable)",
    )


def _load_unit(args) -> ParsedUnit:
    paths = [args.domain]
    if args.problem:
        paths.append(args.problem)
    return load_files(paths)


def _parse_grid_spec(spec: str):
    name, eq, rest = spec.partition("=")
    if not eq or not name:
        raise InputError(f"bad --grid spec {spec!r}: expected name=WxH[,cells]")
    parts = rest.split(",")
    dims = parts[0].lower().split("x")
    if len(dims) != 2:
        raise InputError(f"bad --grid spec {spec!r}: dimensions must be WxH")
    try:
        width, height = int(dims[0]), int(dims[1])
    except ValueError:
        raise InputError(f"bad --grid spec {spec!r}: dimensions must be WxH")
    return name, make_grid_path(width, height, tuple(parts[1:]))


def _needed_predicates(unit: ParsedUnit) -> set[str]:
    dom = unit.domain
    names = {g.query.name for g in dom.guards}
    for schema in list(dom.actions) + list(dom.sensings):
        for c in schema.pre:
            if c.kind == FEASIBLE and c.query is not None:
                names.add(c.query.name)
    return names


def _registry(args, unit: ParsedUnit) -> Optional[FeasibilityRegistry]:
    reg = FeasibilityRegistry()
    for path in args.lookup:
        register_lookup(reg, path)
    for spec in args.grid:
        name, evaluator = _parse_grid_spec(spec)
        reg.register(name, evaluator)
    needed = _needed_predicates(unit)
    missing = needed - set(reg.names)
    if missing:
        raise InputError(
            "domain uses feasibility predicates with no evaluator: "
            + ", ".join(sorted(missing))
            + " (wire them with --lookup or --grid)"
        )
    return reg if (args.lookup or args.grid or needed) else None


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    with open(path, "w") as fh:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")


# ----------------------------------------------------------------------
# subcommands


def _require_problem(unit: ParsedUnit) -> None:
    if not unit.problem.goal:
        raise InputError("no init/goal: pass --problem or a combined file")


def cmd_plan(args) -> int:
    unit = _load_unit(args)
    _require_problem(unit)
    model = ground(unit.domain)
    reg = _registry(args, unit)
    cfg = EngineConfig(
        threads=args.threads,
        max_steps=args.max_steps,
        minimize_sensing=args.minimize_sensing,
        equiv_classes=args.equiv_classes,
        deterministic=args.deterministic,
    )
    result = build(model, unit.problem, cfg, reg)
    if not result.ok:
        f = result.failure
        where = f.sensing if f.sensing is not None else "<root>"
        print(
            f"Failure: {f.reason} (branch {where}"
            + (f" = {f.outcome}" if f.outcome is not None else "")
            + ")",
            file=sys.stderr,
        )
        return EXIT_NO_PLAN

    plan = result.plan
    if args.format == "dot":
        text = export.to_dot(plan)
    else:
        text = json.dumps(export.to_json(plan), indent=2) + "\n"
    _write(text, args.out)

    stats = plan.stats.as_dict()
    stats["time_seconds"] = result.report.wallclock_s
    stats["cache_hits"] = result.report.cache_hits
    stats["efficiency"] = result.report.efficiency
    if args.stats:
        _write(json.dumps(stats, indent=2), args.stats)
    else:
        print(
            " ".join(f"{k}={v}" for k, v in stats.items()),
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_verify(args) -> int:
    unit = _load_unit(args)
    _require_problem(unit)
    model = ground(unit.domain)
    reg = _registry(args, unit)
    goal = goal_conditions(model, unit.problem)
    try:
        with open(args.plan) as fh:
            doc = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read plan file: {exc}")
    plan = export.from_json(doc, model, goal)
    init = initial_belief(model, unit.problem)
    res = verify(plan, init, reg)
    if res.ok:
        print(f"ok: {res.leaves} branch(es) reach the goal")
        return EXIT_OK
    for v in res.violations:
        print(f"violation: {v}", file=sys.stderr)
    if not res.complete:
        print("violation: branch walk truncated (leaf cap)", file=sys.stderr)
    return EXIT_VERIFY


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "bts":
        if args.m is None:
            raise InputError("gen bts requires --m")
        text = benchmarks.gen_bts(args.m)
    elif fam == "colorball":
        if args.n is None:
            raise InputError("gen colorball requires --n")
        text = benchmarks.gen_colorball(args.n, args.x)
    elif fam == "doors":
        if args.n is None:
            raise InputError("gen doors requires --n")
        text = benchmarks.gen_doors(args.n)
    elif fam == "kitchen":
        text = benchmarks.kitchen_lite_text()
    else:  # pragma: no cover - argparse choices guard this
        raise InputError(f"unknown family {fam!r}")
    _write(text, args.out)
    return EXIT_OK


def cmd_emit(args) -> int:
    unit = _load_unit(args)
    _require_problem(unit)
    prog = asp.emit(unit.domain, unit.problem, step_limit=args.max_steps)
    _write(prog.combined, args.out)
    return EXIT_OK


# ----------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="condplan",
        description="Conditional planner for sensing domains with "
        "external feasibility checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="build and export a conditional plan")
    _add_domain_flags(p_plan)
    p_plan.add_argument("--threads", type=int, default=1, metavar="N")
    p_plan.add_argument("--max-steps", type=int, default=40, metavar="K")
    p_plan.add_argument(
        "--minimize-sensing", type=_on_off, default=True, metavar="on|off"
    )
    p_plan.add_argument(
        "--equiv-classes", type=_on_off, default=True, metavar="on|off"
    )
    p_plan.add_argument(
        "--deterministic", type=_on_off, default=True, metavar="on|off"
    )
    p_plan.add_argument("--format", choices=("dot", "json"), default="json")
    p_plan.add_argument("--out", metavar="PATH")
    p_plan.add_argument("--stats", metavar="PATH")
    p_plan.set_defaults(func=cmd_plan)

    p_verify = sub.add_parser("verify", help="replay a plan against a domain")
    _add_domain_flags(p_verify)
    p_verify.add_argument("--plan", required=True, metavar="PATH",
                          help="plan in JSON form")
    p_verify.set_defaults(func=cmd_verify)

    p_gen = sub.add_parser("gen", help="write a benchmark domain")
    p_gen.add_argument(
        "family", choices=("bts", "colorball", "doors", "kitchen")
    )
    p_gen.add_argument("--m", type=int, help="package count (bts)")
    p_gen.add_argument("--n", type=int, help="grid size (colorball, doors)")
    p_gen.add_argument(
        "--x", type=int, default=1, help="ball count (colorball)"
    )
    p_gen.add_argument("--out", metavar="PATH")
    p_gen.set_defaults(func=cmd_gen)

    p_emit = sub.add_parser(
        "emit", help="encode domain and problem as a logic program"
    )
    _add_domain_flags(p_emit)
    p_emit.add_argument("--max-steps", type=int, default=40, metavar="K")
    p_emit.add_argument("--out", metavar="PATH")
    p_emit.set_defaults(func=cmd_emit)

    return parser


_INPUT_ERRORS = (
    InputError,
    ParseError,
    GroundingError,
    LookupFormatError,
    UnknownPredicate,
    InconsistentBelief,
    export.PlanFormatError,
    asp.EmitError,
    ValueError,
    OSError,
)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
