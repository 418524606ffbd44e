"""Search for one hybrid sequential plan through belief space.

A sequential plan commits to one outcome of every sensing action it
contains; the conditional engine later re-plans the remaining outcomes.
find_plan returns a makespan-minimal plan (optionally with a minimal
number of sensing steps among those) whose last step is an actuation,
breaking ties by lexicographic step ordering.  brute_force_plan is an
independent breadth-first oracle with the same contract, used to check
the search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .belief import (
    BeliefState,
    InconsistentBelief,
    Known,
    Unknown,
    apply_actuation,
    apply_sensing,
    applicable,
    goal_holds,
    holds,
    outcomes,
)
from .model import (
    EQ,
    FEASIBLE,
    KNOWN,
    NEQ,
    UNKNOWN,
    ASSIGN,
    Condition,
    GroundAction,
    GroundModel,
    GroundSensing,
)

DEFAULT_MAX_STEPS = 40


@dataclass(frozen=True)
class Act:
    """One concurrent actuation step (a single action unless concurrency)."""

    actions: tuple[GroundAction, ...]

    @property
    def key(self) -> str:
        return "act:" + "+".join(a.key for a in self.actions)

    def __str__(self) -> str:
        return "+".join(a.key for a in self.actions)


@dataclass(frozen=True)
class Sense:
    sensing: GroundSensing
    outcome: str

    @property
    def key(self) -> str:
        return f"sense:{self.sensing.key}={self.outcome}"

    def __str__(self) -> str:
        return f"{self.sensing.key}={self.outcome}"


PlanStep = Union[Act, Sense]


@dataclass(frozen=True)
class SequentialPlan:
    steps: tuple[PlanStep, ...]

    @property
    def makespan(self) -> int:
        return len(self.steps)

    @property
    def sensing_count(self) -> int:
        return sum(1 for s in self.steps if isinstance(s, Sense))

    def __str__(self) -> str:
        return "; ".join(str(s) for s in self.steps) or "<empty>"


@dataclass(frozen=True)
class History:
    """Belief trajectory: beliefs[i] precedes steps[i]."""

    beliefs: tuple[BeliefState, ...]


@dataclass(frozen=True)
class TaskConstraint:
    """Forces the first step to be one sensing action with one outcome."""

    sensing: GroundSensing
    outcome: str


class OracleBudgetExceeded(Exception):
    """brute_force_plan visited more (belief, depth) pairs than allowed."""


# ---------------------------------------------------------------------------
# relaxed reachability (pruning and fast failure)


@dataclass
class RelaxedInfo:
    goal_reachable: bool
    actions: tuple[GroundAction, ...]
    sensings: tuple[GroundSensing, ...]


def _relaxed_cond(c: Condition, poss: list[set[str]], feas) -> bool:
    if c.kind == FEASIBLE:
        return feas.check(c.query) if feas is not None else False
    vals = poss[c.inst.index]
    if c.kind == EQ:
        return c.value in vals
    if c.kind == NEQ:
        return any(v != c.value for v in vals)
    return True  # known/unknown can both come about


def relaxed_analysis(
    model: GroundModel,
    start: BeliefState,
    goal: Sequence[Condition],
    feas=None,
) -> RelaxedInfo:
    """Over-approximate the values each fluent can ever take from start.

    Sound for pruning: an action applicable in any belief reachable from
    start is relaxed-applicable here, and an unreachable relaxed goal is
    unreachable in fact.
    """
    poss: list[set[str]] = [
        set(start.candidates(i)) for i in range(len(model.instances))
    ]
    pending = list(model.actions)
    active: list[GroundAction] = []
    changed = True
    while changed:
        changed = False
        still: list[GroundAction] = []
        for a in pending:
            if all(_relaxed_cond(c, poss, feas) for c in a.pre):
                active.append(a)
                for e in a.eff:
                    if e.kind == ASSIGN and e.value not in poss[e.inst.index]:
                        poss[e.inst.index].add(e.value)
                        changed = True
                changed = True
            else:
                still.append(a)
        pending = still
    active.sort(key=lambda a: a.index)
    sensings = tuple(
        s
        for s in model.sensings
        if all(_relaxed_cond(c, poss, feas) for c in s.pre)
    )
    reachable = all(_relaxed_cond(c, poss, feas) for c in goal)
    return RelaxedInfo(reachable, tuple(active), sensings)


# ---------------------------------------------------------------------------
# admissible remaining-steps bound

_INF = 10**9


@dataclass
class _Unit:
    """One achiever step in the backward relevance graph: an action or
    a sensing with the atoms its preconditions require."""

    index: int
    is_sense: bool
    pre_atoms: tuple[int, ...]


class _GoalSolver:
    __slots__ = ("atom_ids", "units", "goal_atom", "cone", "proj")

    def __init__(self, atom_ids, units, goal_atom, cone):
        self.atom_ids = atom_ids
        self.units = units  # (base_cost, pre_atoms, effects)
        self.goal_atom = goal_atom
        self.cone = cone  # inst indices the answer depends on
        self.proj: dict[tuple, int] = {}


# latch window for _Bound: after this many consultations, a bound that
# refuted almost no unexpanded beliefs is switched off for good
_BOUND_WINDOW = 10_000
_BOUND_MIN_RATE = 1_000  # keep while fresh refutations >= checks / this


class _Bound:
    """Admissible lower bound on remaining plan length.

    For every goal literal the backward relevance cone is computed once;
    ground steps relevant to exactly one literal cost 1 in that literal's
    sub-bound and steps shared between literals cost 0 everywhere.  Each
    sub-bound is a max-over-preconditions shortest-chain fixpoint, and
    the sub-bounds add up (steps are counted by at most one literal), so
    the sum never exceeds the true remaining makespan.  With actuation
    concurrency the per-step argument breaks, so the max is used instead.

    Goals whose subplans all funnel through one shared resource defeat
    the partition (everything shared, bound near zero), so consultations
    are latched off when they stop refuting anything new.  Being
    admissible, the bound never changes what find_plan returns, so the
    latch cannot either.
    """

    def __init__(self, model: GroundModel, goal, feas, actions, sensings):
        self.model = model
        self.goal = tuple(goal)
        self.feas = feas
        self.h_memo: dict[BeliefState, int] = {}
        self.checks = 0
        self.fresh_prunes = 0
        self.latched = False

        self._atom_key_to_id: dict[tuple, int] = {}
        self._atom_conds: list[tuple] = []
        self._assign_by: dict[tuple[int, str], list[int]] = {}
        self._assign_inst: dict[int, list[int]] = {}
        self._exclude_by: dict[tuple[int, str], list[int]] = {}
        self._exclude_inst: dict[int, list[int]] = {}
        self._sense_by_inst: dict[int, list[int]] = {}
        self._units: list[Optional[_Unit]] = []
        self._unit_steps: list = []

        for a in actions:
            uid = len(self._unit_steps)
            self._unit_steps.append(a)
            for e in a.eff:
                if e.kind == ASSIGN:
                    self._assign_by.setdefault((e.inst.index, e.value), []).append(uid)
                    self._assign_inst.setdefault(e.inst.index, []).append(uid)
                else:
                    self._exclude_by.setdefault((e.inst.index, e.value), []).append(uid)
                    self._exclude_inst.setdefault(e.inst.index, []).append(uid)
        for s in sensings:
            uid = len(self._unit_steps)
            self._unit_steps.append(s)
            self._sense_by_inst.setdefault(s.target.index, []).append(uid)
        self._units = [None] * len(self._unit_steps)

        # constraint closure can refine one instance from knowledge about
        # another in the same constraint, so achiever sets must span the
        # connected component, not just the instance itself
        comp = list(range(len(model.instances)))

        def find(i: int) -> int:
            while comp[i] != i:
                comp[i] = comp[comp[i]]
                i = comp[i]
            return i

        for con in model.constraints:
            idxs = [i for i, _ in con.literals]
            for i in idxs[1:]:
                comp[find(i)] = find(idxs[0])
        members: dict[int, list[int]] = {}
        for i in range(len(model.instances)):
            members.setdefault(find(i), []).append(i)
        self._comp_members = {i: members[find(i)] for i in range(len(model.instances))}
        self._refiner_cache: dict[int, tuple[int, ...]] = {}

        relevant: list[tuple] = []
        for g in self.goal:
            atom = self._atom_of(g)
            if atom is None:
                relevant.append((None, {}))
                continue
            relevant.append((atom, self._close_backward(atom)))

        counts: dict[int, int] = {}
        for _, edges in relevant:
            for uid in edges:
                counts[uid] = counts.get(uid, 0) + 1

        self.solvers: list[tuple[Condition, _GoalSolver]] = []
        for g, (atom, edges) in zip(self.goal, relevant):
            if atom is None:
                continue
            atom_ids = set([atom])
            units = []
            for uid in sorted(edges):
                u = self._units[uid]
                assert u is not None
                atom_ids.update(u.pre_atoms)
                atom_ids.update(aid for aid, _ in edges[uid])
                base = 1 if counts[uid] == 1 else 0
                units.append((base, u.pre_atoms, tuple(edges[uid])))
            cone = sorted(
                {
                    cond[1]
                    for aid in atom_ids
                    for cond in [self._atom_conds[aid]]
                    if cond[0] != FEASIBLE
                }
            )
            self.solvers.append(
                (g, _GoalSolver(sorted(atom_ids), units, atom, cone))
            )

    def _atom_of(self, c: Condition) -> Optional[int]:
        if c.kind == FEASIBLE:
            # static: either free or impossible, no chain to build
            return None
        key = (c.kind, c.inst.index, c.value)
        got = self._atom_key_to_id.get(key)
        if got is None:
            got = len(self._atom_conds)
            self._atom_key_to_id[key] = got
            self._atom_conds.append(key)
        return got

    def _refiners(self, idx: int) -> tuple[int, ...]:
        """Units that can narrow what is known about instance idx: its
        own sensings and excludes, plus any sensing, exclude or assign
        touching a constraint sibling (closure may then promote idx)."""
        got = self._refiner_cache.get(idx)
        if got is None:
            acc: set[int] = set()
            for j in self._comp_members[idx]:
                acc.update(self._sense_by_inst.get(j, ()))
                acc.update(self._exclude_inst.get(j, ()))
                if j != idx:
                    acc.update(self._assign_inst.get(j, ()))
            got = tuple(sorted(acc))
            self._refiner_cache[idx] = got
        return got

    def _achievers(self, atom: int) -> list[tuple[int, Optional[tuple]]]:
        kind, idx, value = self._atom_conds[atom]
        out: list[tuple[int, Optional[tuple]]] = []
        if kind == EQ:
            out += [(u, None) for u in self._assign_by.get((idx, value), ())]
            gate = ("seq", idx, value)
            out += [(u, gate) for u in self._refiners(idx)]
        elif kind == NEQ:
            for (i, v), us in self._assign_by.items():
                if i == idx and v != value:
                    out += [(u, None) for u in us]
            out += [(u, None) for u in self._exclude_by.get((idx, value), ())]
            gate = ("sneq", idx, value)
            out += [(u, gate) for u in self._refiners(idx)]
        elif kind == KNOWN:
            out += [(u, None) for u in self._assign_inst.get(idx, ())]
            out += [(u, None) for u in self._refiners(idx)]
        # UNKNOWN: nothing ever un-knows a fluent
        return out

    def _build_unit(self, uid: int) -> Optional[_Unit]:
        """Pre atoms for a unit; None if a static guard rules it out."""
        step = self._unit_steps[uid]
        pre_atoms: list[int] = []
        for c in step.pre:
            if c.kind == FEASIBLE:
                if self.feas is None or not self.feas.check(c.query):
                    return None
                continue
            aid = self._atom_of(c)
            assert aid is not None
            pre_atoms.append(aid)
        is_sense = isinstance(step, GroundSensing)
        if is_sense:
            aid = self._atom_of(
                Condition(UNKNOWN, inst=step.target)
            )
            pre_atoms.append(aid)
        return _Unit(uid, is_sense, tuple(pre_atoms))

    def _close_backward(
        self, goal_atom: int
    ) -> dict[int, list[tuple[int, Optional[tuple]]]]:
        """Relevant units for one goal atom, mapped to the (atom, gate)
        effect edges they contribute within this literal's cone."""
        seen_atoms = {goal_atom}
        frontier = [goal_atom]
        edges: dict[int, list[tuple[int, Optional[tuple]]]] = {}
        while frontier:
            atom = frontier.pop()
            for uid, gate in self._achievers(atom):
                u = self._units[uid]
                if u is None:
                    if self._unit_steps[uid] is None:
                        continue
                    u = self._build_unit(uid)
                    if u is None:
                        self._unit_steps[uid] = None
                        continue
                    self._units[uid] = u
                known = edges.get(uid)
                if known is None:
                    edges[uid] = [(atom, gate)]
                    for aid in u.pre_atoms:
                        if aid not in seen_atoms:
                            seen_atoms.add(aid)
                            frontier.append(aid)
                else:
                    known.append((atom, gate))
        return edges

    def _atom_cost0(self, b: BeliefState, aid: int) -> int:
        kind, idx, value = self._atom_conds[aid]
        e = b.entries[idx]
        if kind == EQ:
            return 0 if isinstance(e, Known) and e.value == value else _INF
        if kind == NEQ:
            if isinstance(e, Known):
                return 0 if e.value != value else _INF
            return 0 if value in e.excluded else _INF
        if kind == KNOWN:
            return 0 if isinstance(e, Known) else _INF
        if kind == UNKNOWN:
            return 0 if isinstance(e, Unknown) else _INF
        raise AssertionError(kind)

    @staticmethod
    def _gate_open(b: BeliefState, gate: tuple) -> bool:
        tag, idx, value = gate
        e = b.entries[idx]
        if not isinstance(e, Unknown):
            return False
        domain = b.model.instances[idx].decl.domain
        if tag == "seq":
            return value in domain and value not in e.excluded
        return any(v != value and v not in e.excluded for v in domain)

    def _solve(self, sol: _GoalSolver, b: BeliefState) -> int:
        cost = {aid: self._atom_cost0(b, aid) for aid in sol.atom_ids}
        if cost[sol.goal_atom] == 0:
            return 0
        changed = True
        while changed:
            changed = False
            for base, pre_atoms, effects in sol.units:
                worst = 0
                for aid in pre_atoms:
                    ca = cost[aid]
                    if ca >= _INF:
                        worst = _INF
                        break
                    if ca > worst:
                        worst = ca
                if worst >= _INF:
                    continue
                total = base + worst
                for aid, gate in effects:
                    if total < cost[aid] and (
                        gate is None or self._gate_open(b, gate)
                    ):
                        cost[aid] = total
                        changed = True
        return cost[sol.goal_atom]

    @staticmethod
    def _entry_key(e) -> object:
        # strings hash-cache in CPython, Knowledge dataclasses do not;
        # Known keys are str, Unknown keys are tuples, so no collisions
        if isinstance(e, Known):
            return e.value
        exc = e.excluded
        return tuple(sorted(exc)) if exc else ()

    def h(self, b: BeliefState) -> int:
        got = self.h_memo.get(b)
        if got is not None:
            return got
        total = 0
        combine_max = self.model.concurrency
        entries = b.entries
        ekey = self._entry_key
        for g, sol in self.solvers:
            if holds(b, g, self.feas):
                continue
            key = tuple(ekey(entries[i]) for i in sol.cone)
            val = sol.proj.get(key)
            if val is None:
                val = self._solve(sol, b)
                sol.proj[key] = val
            if combine_max:
                if val > total:
                    total = val
            else:
                total += val
            if total >= _INF:
                break
        self.h_memo[b] = total
        return total

    def prunes(self, b: BeliefState, remaining: int, fresh: bool) -> bool:
        """True when no plan short enough can exist from b.  `fresh`
        marks beliefs not yet expanded; only refuting those saves real
        work, and the latch measures exactly that."""
        if self.latched:
            return False
        self.checks += 1
        if self.h(b) > remaining:
            if fresh:
                self.fresh_prunes += 1
            return True
        if (
            self.checks >= _BOUND_WINDOW
            and self.fresh_prunes * _BOUND_MIN_RATE < self.checks
        ):
            self.latched = True
        return False


# ---------------------------------------------------------------------------
# depth-first search with shared memo


class SearchMemo:
    """Cross-call cache of path-independent search facts.

    All entries are canonical: whether an exact-depth suffix exists from
    a belief, and if so which one is lexicographically first, does not
    depend on how the belief was reached or which branch task asked.
    The conditional engine shares one memo across all its tasks, which
    is also safe under worker threads (values are write-once facts).

    A memo is only valid for one (model, goal, feasibility) combination.
    """

    __slots__ = (
        "model",
        "goal",
        "feas",
        "actions",
        "sensings",
        "expansions",
        "dead",
        "succ",
        "dead_b",
        "succ_b",
        "bound",
    )

    def __init__(
        self,
        model: GroundModel,
        goal: Sequence[Condition],
        feas,
        actions: tuple[GroundAction, ...],
        sensings: tuple[GroundSensing, ...],
        use_bound: bool = True,
    ):
        self.model = model
        self.goal = tuple(goal)
        self.feas = feas
        self.actions = actions
        self.sensings = sensings
        self.expansions: dict[
            BeliefState, list[tuple[str, PlanStep, BeliefState]]
        ] = {}
        self.dead: set[tuple[BeliefState, int]] = set()
        self.succ: dict[tuple[BeliefState, int], tuple[PlanStep, ...]] = {}
        self.dead_b: set[tuple[BeliefState, int, int]] = set()
        self.succ_b: dict[
            tuple[BeliefState, int, int], tuple[PlanStep, ...]
        ] = {}
        self.bound: Optional[_Bound] = (
            _Bound(model, self.goal, feas, actions, sensings)
            if use_bound
            else None
        )

    @classmethod
    def for_start(
        cls,
        model: GroundModel,
        start: BeliefState,
        goal: Sequence[Condition],
        feas=None,
        use_bound: bool = True,
    ) -> "SearchMemo":
        """Seed active action/sensing sets from a relaxed analysis at
        `start`; sound for every belief reachable from it."""
        info = relaxed_analysis(model, start, goal, feas)
        return cls(model, goal, feas, info.actions, info.sensings, use_bound)


class _Search:
    def __init__(self, memo: SearchMemo):
        self.memo = memo
        self.model = memo.model
        self.goal = memo.goal
        self.feas = memo.feas

    def _act_steps(self, b: BeliefState) -> list[tuple[GroundAction, ...]]:
        singles = [
            a
            for a in self.memo.actions
            if all(holds(b, c, self.feas) for c in a.pre)
        ]
        if not self.model.concurrency:
            return [(a,) for a in singles]
        steps: list[tuple[GroundAction, ...]] = []

        def grow(chosen: list[GroundAction], next_i: int) -> None:
            if chosen:
                steps.append(tuple(chosen))
            for j in range(next_i, len(singles)):
                cand = singles[j]
                ok = True
                for c in chosen:
                    if c.writes & cand.writes or c.mutex & cand.mutex:
                        ok = False
                        break
                if ok:
                    chosen.append(cand)
                    grow(chosen, j + 1)
                    chosen.pop()

        grow([], 0)
        return steps

    def expand(self, b: BeliefState) -> list[tuple[str, PlanStep, BeliefState]]:
        """Successor steps of a belief, sorted by step key, cached."""
        cached = self.memo.expansions.get(b)
        if cached is not None:
            return cached
        out: list[tuple[str, PlanStep, BeliefState]] = []
        for acts in self._act_steps(b):
            step = Act(acts)
            try:
                b2 = apply_actuation(b, acts)
            except (InconsistentBelief, ValueError):
                continue
            out.append((step.key, step, b2))
        for s in self.memo.sensings:
            if not applicable(b, s, self.feas):
                continue
            for o in outcomes(b, s):
                step = Sense(s, o)
                try:
                    b2 = apply_sensing(b, s, o)
                except InconsistentBelief:
                    continue
                out.append((step.key, step, b2))
        out.sort(key=lambda t: t[0])
        self.memo.expansions[b] = out
        return out

    def run(self, start: BeliefState, depth: int) -> Optional[tuple[PlanStep, ...]]:
        """Lexicographically first plan of exactly `depth` steps, or None.

        Memo entries are keyed on (belief, remaining), which does not
        depend on the path taken, so they persist across deepening
        rounds and across branch tasks.
        """
        dead = self.memo.dead
        succ = self.memo.succ
        bound = self.memo.bound
        expansions = self.memo.expansions

        def rec(b: BeliefState, remaining: int) -> Optional[tuple[PlanStep, ...]]:
            if remaining == 0:
                return () if goal_holds(b, self.goal, self.feas) else None
            # admissible bound: refute without expanding or recording
            if bound is not None and not bound.latched:
                if bound.prunes(b, remaining, b not in expansions):
                    return None
            key = (b, remaining)
            if key in dead:
                return None
            hit = succ.get(key)
            if hit is not None:
                return hit
            for _, step, b2 in self.expand(b):
                if isinstance(step, Sense) and remaining < 2:
                    continue  # a plan may not end with a sensing step
                sub = rec(b2, remaining - 1)
                if sub is not None:
                    res = (step,) + sub
                    succ[key] = res
                    return res
            dead.add(key)
            return None

        return rec(start, depth)

    def run_budgeted(
        self, start: BeliefState, depth: int, budget: int
    ) -> Optional[tuple[PlanStep, ...]]:
        """Like run(), with at most `budget` sensing steps."""
        dead = self.memo.dead_b
        succ = self.memo.succ_b
        bound = self.memo.bound
        expansions = self.memo.expansions

        def rec(
            b: BeliefState, remaining: int, left: int
        ) -> Optional[tuple[PlanStep, ...]]:
            if remaining == 0:
                return () if goal_holds(b, self.goal, self.feas) else None
            if bound is not None and not bound.latched:
                if bound.prunes(b, remaining, b not in expansions):
                    return None
            key = (b, remaining, left)
            if key in dead:
                return None
            hit = succ.get(key)
            if hit is not None:
                return hit
            for _, step, b2 in self.expand(b):
                if isinstance(step, Sense):
                    if remaining < 2 or left == 0:
                        continue
                    sub = rec(b2, remaining - 1, left - 1)
                else:
                    sub = rec(b2, remaining - 1, left)
                if sub is not None:
                    res = (step,) + sub
                    succ[key] = res
                    return res
            dead.add(key)
            return None

        return rec(start, depth, budget)


def _replay(
    start: BeliefState, steps: Sequence[PlanStep]
) -> History:
    beliefs = [start]
    b = start
    for step in steps:
        if isinstance(step, Act):
            b = apply_actuation(b, step.actions)
        else:
            b = apply_sensing(b, step.sensing, step.outcome)
        beliefs.append(b)
    return History(tuple(beliefs))


def find_plan(
    model: GroundModel,
    start: BeliefState,
    goal: Sequence[Condition],
    constraint: Optional[TaskConstraint] = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    minimize_sensing: bool = True,
    feas=None,
    memo: Optional[SearchMemo] = None,
) -> Optional[tuple[SequentialPlan, History]]:
    """Makespan-minimal sequential plan from start, or None.

    With a TaskConstraint the first step is pinned to the given sensing
    and outcome and counts toward the makespan.  When minimize_sensing is
    set, the number of Sense steps is minimized among all plans of the
    optimal makespan; ties always go to the lexicographically least step
    sequence.  The last step of any non-empty plan is an actuation.

    A caller solving many related sub-problems (the conditional engine)
    passes one SearchMemo for all of them; its answers do not change
    any result, only how much is recomputed.
    """
    prefix: list[PlanStep] = []
    base = start
    if constraint is not None:
        s = constraint.sensing
        if not applicable(start, s, feas) or constraint.outcome not in outcomes(
            start, s
        ):
            return None
        try:
            base = apply_sensing(start, s, constraint.outcome)
        except InconsistentBelief:
            return None
        prefix = [Sense(s, constraint.outcome)]

    info = relaxed_analysis(model, base, goal, feas)
    if not info.goal_reachable:
        return None
    if memo is None:
        memo = SearchMemo(model, goal, feas, info.actions, info.sensings)
    else:
        if memo.model is not model or memo.goal != tuple(goal):
            raise ValueError("memo built for a different model or goal")
    search = _Search(memo)

    found: Optional[tuple[PlanStep, ...]] = None
    for rest_depth in range(0, max_steps + 1 - len(prefix)):
        if prefix and rest_depth == 0:
            continue  # a lone forced sensing step cannot end a plan
        found = search.run(base, rest_depth)
        if found is not None:
            break
    if found is None:
        return None

    steps = prefix + list(found)
    sense_total = sum(1 for st in steps if isinstance(st, Sense))
    if minimize_sensing and sense_total - len(prefix) > 0:
        for budget in range(0, sense_total - len(prefix)):
            better = search.run_budgeted(base, len(found), budget)
            if better is not None:
                steps = prefix + list(better)
                break

    plan = SequentialPlan(tuple(steps))
    return plan, _replay(start, plan.steps)


# ---------------------------------------------------------------------------
# breadth-first oracle


def brute_force_plan(
    model: GroundModel,
    start: BeliefState,
    goal: Sequence[Condition],
    constraint: Optional[TaskConstraint] = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    minimize_sensing: bool = True,
    feas=None,
    explored_cap: int = 100_000,
) -> Optional[tuple[SequentialPlan, History]]:
    """Exhaustive breadth-first counterpart of find_plan.

    Enumerates belief layers depth by depth, deduplicating on
    (belief, sensing-count, ended-in-actuation) and keeping the
    lexicographically least prefix for each.  Raises OracleBudgetExceeded
    past `explored_cap` visited (belief, depth) pairs.
    """
    prefix: tuple[PlanStep, ...] = ()
    base = start
    if constraint is not None:
        s = constraint.sensing
        if not applicable(start, s, feas) or constraint.outcome not in outcomes(
            start, s
        ):
            return None
        base = apply_sensing(start, s, constraint.outcome)
        prefix = (Sense(s, constraint.outcome),)

    def successors(b: BeliefState):
        singles = [
            a for a in model.actions if all(holds(b, c, feas) for c in a.pre)
        ]
        if model.concurrency:
            combos = []
            for r in range(1, len(singles) + 1):
                for combo in itertools.combinations(singles, r):
                    if applicable(b, combo, feas):
                        combos.append(combo)
        else:
            combos = [(a,) for a in singles]
        for combo in combos:
            step = Act(combo)
            try:
                yield step, apply_actuation(b, combo)
            except (InconsistentBelief, ValueError):
                continue
        for s in model.sensings:
            if applicable(b, s, feas):
                for o in outcomes(b, s):
                    try:
                        yield Sense(s, o), apply_sensing(b, s, o)
                    except InconsistentBelief:
                        continue

    # layer entries: (belief, steps, senses, last_was_act)
    layer: list[tuple[BeliefState, tuple[PlanStep, ...], int, bool]] = [
        (base, (), len(prefix), constraint is None)
    ]
    explored = 0
    for depth in range(0, max_steps + 1 - len(prefix)):
        layer.sort(key=lambda e: tuple(st.key for st in e[1]))
        seen: set[tuple[BeliefState, int, bool]] = set()
        deduped = []
        beliefs_here = set()
        for entry in layer:
            k = (entry[0], entry[2], entry[3])
            if k in seen:
                continue
            seen.add(k)
            deduped.append(entry)
            beliefs_here.add(entry[0])
        explored += len(beliefs_here)
        if explored > explored_cap:
            raise OracleBudgetExceeded(
                f"visited {explored} (belief, depth) pairs, cap {explored_cap}"
            )
        complete = [
            e
            for e in deduped
            if e[3] and goal_holds(e[0], goal, feas)
        ]
        if complete:
            if minimize_sensing:
                best_senses = min(e[2] for e in complete)
                complete = [e for e in complete if e[2] == best_senses]
            steps = prefix + complete[0][1]
            plan = SequentialPlan(steps)
            return plan, _replay(start, steps)
        nxt = []
        for b, steps, senses, _ in deduped:
            if len(prefix) + len(steps) >= max_steps:
                continue
            for step, b2 in successors(b):
                if isinstance(step, Sense):
                    nxt.append((b2, steps + (step,), senses + 1, False))
                else:
                    nxt.append((b2, steps + (step,), senses, True))
        layer = nxt
        if not layer:
            break
    return None
