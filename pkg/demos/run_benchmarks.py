#!/usr/bin/env python3
"""Run the benchmark families and print a stats table.

The structural columns (tree, dag, depth, senses, leaves) are
deterministic: any machine reproduces them exactly with the default
single-thread configuration.  Times are wallclock and vary.

    python3 demos/run_benchmarks.py            # the quick matrix
    python3 demos/run_benchmarks.py --heavy    # adds colorball 3-2 (minutes)
    python3 demos/run_benchmarks.py --threads 8 --json out.jsonl
"""

from __future__ import annotations

import argparse
import json
import time

from condplan import (
    EngineConfig,
    FeasibilityRegistry,
    build,
    doors_evaluator,
    gen_bts,
    gen_colorball,
    gen_doors,
    ground,
    initial_belief,
    kitchen_lite_text,
    kitchen_routes_path,
    parse,
    register_lookup,
    verify,
)


def doors_registry(n: int) -> FeasibilityRegistry:
    reg = FeasibilityRegistry()
    reg.register("reach", doors_evaluator(n))
    return reg


def kitchen_registry() -> FeasibilityRegistry:
    reg = FeasibilityRegistry()
    register_lookup(reg, kitchen_routes_path())
    return reg


def matrix(heavy: bool):
    rows = [
        ("bts 2", gen_bts(2), None),
        ("bts 5", gen_bts(5), None),
        ("bts 10", gen_bts(10), None),
        ("bts 17", gen_bts(17), None),
        ("colorball 2-1", gen_colorball(2, 1), None),
        ("colorball 3-1", gen_colorball(3, 1), None),
        ("doors 3", gen_doors(3), doors_registry(3)),
        ("doors 5", gen_doors(5), doors_registry(5)),
        ("kitchen-lite", kitchen_lite_text(), kitchen_registry()),
    ]
    if heavy:
        rows.append(("colorball 3-2", gen_colorball(3, 2), None))
    return rows


def run_one(name, text, reg, threads):
    unit = parse(text)
    model = ground(unit.domain)
    t0 = time.perf_counter()
    result = build(model, unit.problem, EngineConfig(threads=threads), reg)
    elapsed = time.perf_counter() - t0
    if not result.ok:
        raise SystemExit(f"{name}: no plan ({result.failure.reason})")
    ok = verify(result.plan, initial_belief(model, unit.problem), reg).ok
    row = {"instance": name, **result.plan.stats.as_dict()}
    row["verified"] = ok
    row["time_s"] = round(elapsed, 2)
    row["cache_hits"] = result.report.cache_hits
    return row


COLS = [
    ("instance", 14), ("tree_size", 9), ("dag_size", 8), ("max_depth", 9),
    ("sensing_nodes", 13), ("leaves", 6), ("cache_hits", 10),
    ("verified", 8), ("time_s", 7),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--heavy", action="store_true",
                    help="include colorball 3-2 (runs for minutes)")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--json", metavar="PATH",
                    help="also append one JSON object per row to PATH")
    args = ap.parse_args()

    header = " | ".join(f"{name:>{w}}" for name, w in COLS)
    print(header)
    print("-" * len(header))
    sink = open(args.json, "a") if args.json else None
    for name, text, reg in matrix(args.heavy):
        row = run_one(name, text, reg, args.threads)
        print(" | ".join(f"{str(row[c]):>{w}}" for c, w in COLS))
        if sink:
            sink.write(json.dumps(row) + "\n")
    if sink:
        sink.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
