"""Independent replay checker for conditional plans.

Walks every branch of a plan from the initial belief, re-deriving
applicability, outcome sets and goal satisfaction from the model alone.
Nothing from the construction phase is trusted: a plan that links in a
cached subtree gets that subtree re-executed under the actual belief of
the branch that reached it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .belief import (
    BeliefState,
    InconsistentBelief,
    Known,
    applicable,
    apply_actuation,
    apply_sensing,
    goal_holds,
    outcomes,
)
from .engine import ActNode, ConditionalPlan, PlanNode, SenseNode

UNCOVERED_OUTCOME = "UncoveredOutcome"
PRECONDITION_VIOLATED = "PreconditionViolated"
ILLEGAL_OUTCOME_EDGE = "IllegalOutcomeEdge"
GOAL_UNREACHED = "GoalUnreached"
CYCLE_DETECTED = "CycleDetected"

DEFAULT_LEAF_CAP = 200_000


@dataclass(frozen=True)
class Violation:
    kind: str
    path: tuple[str, ...]
    message: str

    def __str__(self) -> str:
        where = " / ".join(self.path) if self.path else "<root>"
        return f"{self.kind} at [{where}]: {self.message}"


@dataclass
class VerifyResult:
    violations: list[Violation] = field(default_factory=list)
    leaves: int = 0
    complete: bool = True

    @property
    def ok(self) -> bool:
        return self.complete and not self.violations


def verify(
    plan: ConditionalPlan,
    init: BeliefState,
    feas=None,
    max_leaves: int = DEFAULT_LEAF_CAP,
) -> VerifyResult:
    """Replay all branches; collect violations instead of raising."""
    res = VerifyResult()
    goal = plan.goal

    if plan.root is None:
        res.leaves = 1
        if not goal_holds(init, goal, feas):
            res.violations.append(
                Violation(GOAL_UNREACHED, (), "empty plan but goal not initially satisfied")
            )
        return res

    # DFS over (node, belief); the same node may recur under different
    # beliefs when subtrees are shared, so the walk is per-occurrence.
    def walk(node: PlanNode, b: BeliefState, path: tuple[str, ...],
             on_path: frozenset[int]) -> None:
        if not res.complete:
            return
        if id(node) in on_path:
            res.violations.append(
                Violation(CYCLE_DETECTED, path, f"node '{node.label}' revisited on its own branch")
            )
            return
        on_path = on_path | {id(node)}
        if isinstance(node, ActNode):
            step = list(node.actions)
            here = path + (node.label,)
            if not applicable(b, step, feas):
                res.violations.append(
                    Violation(PRECONDITION_VIOLATED, here,
                              "actuation not applicable in the belief reaching it")
                )
                return
            try:
                b2 = apply_actuation(b, step)
            except InconsistentBelief as exc:
                res.violations.append(
                    Violation(PRECONDITION_VIOLATED, here, f"effects made the belief inconsistent: {exc}")
                )
                return
            if node.child is None:
                res.leaves += 1
                if res.leaves > max_leaves:
                    res.complete = False
                    return
                if not goal_holds(b2, goal, feas):
                    res.violations.append(
                        Violation(GOAL_UNREACHED, here, "branch ends without satisfying the goal")
                    )
                return
            walk(node.child, b2, here, on_path)
            return

        s = node.sensing
        here = path + (node.label,)
        if isinstance(b.knowledge(s.target), Known):
            res.violations.append(
                Violation(PRECONDITION_VIOLATED, here, f"sensing target {s.target} already known")
            )
            return
        if not applicable(b, s, feas):
            res.violations.append(
                Violation(PRECONDITION_VIOLATED, here,
                          "sensing not applicable in the belief reaching it")
            )
            return
        outs = outcomes(b, s)
        for o in outs:
            if o not in node.edges:
                res.violations.append(
                    Violation(UNCOVERED_OUTCOME, here, f"no branch for possible outcome '{o}'")
                )
        for o, child in node.ordered_edges():
            if o not in outs:
                res.violations.append(
                    Violation(ILLEGAL_OUTCOME_EDGE, here + (f"={o}",),
                              f"edge for outcome '{o}' which the belief rules out")
                )
                continue
            walk(child, apply_sensing(b, s, o), here + (f"={o}",), on_path)

    walk(plan.root, init, (), frozenset())
    return res


def enumerate_branches(
    plan: ConditionalPlan,
    init: BeliefState,
    feas=None,
    limit: Optional[int] = None,
) -> Iterator[tuple[tuple[str, ...], BeliefState]]:
    """Yield (step labels, final belief) per branch, lexicographic-first.

    Branches that are not executable (violations) are skipped; use
    verify() first when that matters.
    """
    if plan.root is None:
        yield (), init
        return
    count = 0

    def walk(node: PlanNode, b: BeliefState, path: tuple[str, ...]):
        nonlocal count
        if limit is not None and count >= limit:
            return
        if isinstance(node, ActNode):
            step = list(node.actions)
            if not applicable(b, step, feas):
                return
            try:
                b2 = apply_actuation(b, step)
            except InconsistentBelief:
                return
            here = path + (node.label,)
            if node.child is None:
                count += 1
                yield here, b2
            else:
                yield from walk(node.child, b2, here)
            return
        s = node.sensing
        if isinstance(b.knowledge(s.target), Known) or not applicable(b, s, feas):
            return
        outs = set(outcomes(b, s))
        for o, child in node.ordered_edges():
            if o in outs:
                yield from walk(child, apply_sensing(b, s, o),
                                path + (f"{node.label}={o}",))

    yield from walk(plan.root, init, ())
