#!/usr/bin/env python3
"""Walk through planning with external feasibility checks.

A service robot fetches a bowl (and, for soup, a spoon), cleans it and
serves whichever meal turns out to be requested.  Whether the robot can
navigate between two locations is not part of the domain model — it is
answered by an external route evaluator.  This script plans three times:

1. with every route open,
2. with the direct route from the table to cabinetA closed (the planner
   routes around it),
3. with cabinetA unreachable from everywhere (planning fails, since the
   bowls start there).
"""

from __future__ import annotations

from condplan import (
    FeasibilityRegistry,
    build,
    enumerate_branches,
    ground,
    initial_belief,
    kitchen_lite_text,
    kitchen_routes_path,
    load_lookup,
    make_table_lookup,
    parse,
    to_json,
)


def registry_with(closed: set[tuple[str, str]]) -> FeasibilityRegistry:
    """Route table from the shipped lookup file, minus the closed pairs."""
    verdicts = load_lookup(kitchen_routes_path())
    for q in verdicts:
        if q.args in closed:
            verdicts[q] = False
    reg = FeasibilityRegistry()
    reg.register("route_ok", make_table_lookup(verdicts, "route_ok"))
    return reg


def show(title: str, closed: set[tuple[str, str]]) -> None:
    print(f"=== {title} ===")
    unit = parse(kitchen_lite_text())
    model = ground(unit.domain)
    reg = registry_with(closed)
    result = build(model, unit.problem, feas=reg)
    if not result.ok:
        print(f"no plan: {result.failure.reason}")
        print()
        return
    st = result.plan.stats
    print(
        f"plan: {st.tree_size} nodes over {st.leaves} branches, "
        f"{st.sensing_nodes} sensing points, depth {st.max_depth}"
    )
    init = initial_belief(model, unit.problem)
    first, _ = next(enumerate_branches(result.plan, init, reg))
    print("first branch:")
    for step in first:
        print(f"  {step}")
    routes = sorted(
        {
            n["label"]
            for n in to_json(result.plan)["nodes"]
            if n["kind"] == "act" and "goto(" in n["label"]
        }
    )
    print("routes used:")
    for r in routes:
        print(f"  {r}")
    print()


if __name__ == "__main__":
    show("all routes open", set())
    show("table -> cabinetA closed", {("table", "cabinetA")})
    show(
        "cabinetA unreachable",
        {(f, "cabinetA") for f in ("table", "sink", "cabinetB")},
    )
