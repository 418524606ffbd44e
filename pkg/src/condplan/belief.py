"""Belief states over multi-valued fluents and their transition semantics.

A belief state assigns each ground fluent instance either a Known value or
Unknown with a set of excluded values.  Closure keeps every belief at a
fixpoint where each remaining candidate value is supported by at least one
complete world satisfying all cardinality constraints; a fluent whose
candidate set shrinks to one value is promoted to Known.  Sensing branches
over the candidate values of its target, actuation rewrites values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .model import (
    ASSIGN,
    EQ,
    FEASIBLE,
    KNOWN,
    NEQ,
    UNKNOWN,
    Condition,
    FluentInstance,
    GroundAction,
    GroundConstraint,
    GroundModel,
    GroundRedundancy,
    GroundSensing,
    ProblemSpec,
    _bindings,
    ground_conditions,
    is_var,
)


class InconsistentBelief(Exception):
    """No complete world satisfies the constraints under this knowledge."""


class IllegalOutcome(Exception):
    """A sensing outcome outside outcomes(b, s) was applied."""


@dataclass(frozen=True)
class Known:
    value: str

    def __repr__(self) -> str:
        return f"K:{self.value}"


@dataclass(frozen=True)
class Unknown:
    excluded: frozenset[str] = frozenset()

    def __repr__(self) -> str:
        if self.excluded:
            return "U:!" + ",!".join(sorted(self.excluded))
        return "U"


Knowledge = Union[Known, Unknown]


class BeliefState:
    """Immutable map from fluent instances to Knowledge, kept closed."""

    __slots__ = ("model", "entries", "_hash")

    def __init__(self, model: GroundModel, entries: Iterable[Knowledge]):
        self.model = model
        self.entries: tuple[Knowledge, ...] = tuple(entries)
        self._hash: Optional[int] = None

    def knowledge(self, inst: FluentInstance) -> Knowledge:
        return self.entries[inst.index]

    def candidates(self, idx: int) -> tuple[str, ...]:
        """Values the instance may still take, in domain declaration order."""
        k = self.entries[idx]
        if isinstance(k, Known):
            return (k.value,)
        domain = self.model.instances[idx].decl.domain
        return tuple(v for v in domain if v not in k.excluded)

    @property
    def satisfiable(self) -> bool:
        # Closed beliefs are satisfiable by construction; closure raises
        # InconsistentBelief instead of producing an unsatisfiable state.
        return True

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BeliefState)
            and self.model is other.model
            and self.entries == other.entries
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.entries)
        return self._hash

    def __repr__(self) -> str:
        parts = [
            f"{inst}={self.entries[inst.index]!r}" for inst in self.model.instances
        ]
        return "<belief " + " ".join(parts) + ">"


# ---------------------------------------------------------------------------
# closure


def _interval(
    constraint: GroundConstraint,
    cands: list[set[str]],
    by_inst: dict[int, frozenset[str]],
) -> tuple[int, int]:
    """Achievable range of the constraint's literal count.

    Each instance independently contributes 0 or 1 to the count, so the
    achievable counts form a contiguous interval.
    """
    lo = hi = 0
    for idx, vals in by_inst.items():
        c = cands[idx]
        if c & vals:
            hi += 1
            if c <= vals:
                lo += 1
    return lo, hi


def _constraint_groups(
    comp: Sequence[GroundConstraint],
) -> list[tuple[GroundConstraint, dict[int, frozenset[str]]]]:
    out = []
    for c in comp:
        by_inst: dict[int, set[str]] = {}
        for idx, v in c.literals:
            by_inst.setdefault(idx, set()).add(v)
        out.append((c, {i: frozenset(v) for i, v in by_inst.items()}))
    return out


def _ok(lo: int, hi: int, c: GroundConstraint) -> bool:
    if hi < c.lower:
        return False
    if c.upper is not None and lo > c.upper:
        return False
    return True


def _component_solve(
    groups: list[tuple[GroundConstraint, dict[int, frozenset[str]]]],
    insts: Sequence[int],
    cands: list[set[str]],
    force_idx: Optional[int] = None,
    force_val: Optional[str] = None,
) -> Optional[dict[int, str]]:
    """Search for one assignment of the component's instances satisfying
    every constraint in it, optionally with one instance pinned."""
    order = sorted(insts, key=lambda i: len(cands[i]))
    assigned: dict[int, str] = {}
    if force_idx is not None:
        assigned[force_idx] = force_val  # type: ignore[assignment]
        order = [i for i in order if i != force_idx]

    def feasible() -> bool:
        for c, by_inst in groups:
            lo = hi = 0
            for idx, vals in by_inst.items():
                if idx in assigned:
                    if assigned[idx] in vals:
                        lo += 1
                        hi += 1
                else:
                    cset = cands[idx]
                    if cset & vals:
                        hi += 1
                        if cset <= vals:
                            lo += 1
            if not _ok(lo, hi, c):
                return False
        return True

    def rec(pos: int) -> bool:
        if not feasible():
            return False
        if pos == len(order):
            return True
        idx = order[pos]
        for v in sorted(cands[idx]):
            assigned[idx] = v
            if rec(pos + 1):
                return True
            del assigned[idx]
        return False

    if rec(0):
        return dict(assigned)
    return None


def _filter_component(
    comp: Sequence[GroundConstraint], insts: Sequence[int], cands: list[set[str]]
) -> None:
    """Drop candidate values not supported by any satisfying completion of
    the component.  One pass is exact: a supporting world only uses values
    that are themselves supported by the same world."""
    groups = _constraint_groups(comp)
    if len(groups) == 1:
        c, by_inst = groups[0]
        lo, hi = _interval(c, cands, by_inst)
        if not _ok(lo, hi, c):
            raise InconsistentBelief(f"cardinality constraint {c.index} unsatisfiable")
        for idx in insts:
            vals = by_inst[idx]
            cset = cands[idx]
            in_max = 1 if cset & vals else 0
            in_min = 1 if cset <= vals else 0
            for v in list(cset):
                hit = 1 if v in vals else 0
                if not _ok(lo - in_min + hit, hi - in_max + hit, c):
                    cset.discard(v)
            if not cset:
                raise InconsistentBelief(f"no value left for instance {idx}")
        return

    supported: set[tuple[int, str]] = set()
    for idx in insts:
        for v in sorted(cands[idx]):
            if (idx, v) in supported:
                continue
            sol = _component_solve(groups, insts, cands, idx, v)
            if sol is None:
                cands[idx].discard(v)
            else:
                supported.update(sol.items())
        if not cands[idx]:
            raise InconsistentBelief(f"no value left for instance {idx}")


def closure(b: BeliefState) -> BeliefState:
    """Restore the supported-candidates fixpoint after new information.

    Promotes fluents whose candidate set became a singleton and excludes
    values ruled out by the cardinality constraints.  Raises
    InconsistentBelief when no satisfying completion exists.
    """
    model = b.model
    cands: list[set[str]] = []
    for idx in range(len(model.instances)):
        c = set(b.candidates(idx))
        if not c:
            raise InconsistentBelief(f"no value left for {model.instances[idx]}")
        cands.append(c)
    for comp, insts in zip(model.components, model.component_insts):
        _filter_component(comp, insts, cands)
    entries: list[Knowledge] = []
    for idx, inst in enumerate(model.instances):
        cset = cands[idx]
        if len(cset) == 1:
            entries.append(Known(next(iter(cset))))
        else:
            entries.append(Unknown(frozenset(inst.decl.domain) - cset))
    out = BeliefState(model, entries)
    if out.entries == b.entries:
        return b
    return out


# ---------------------------------------------------------------------------
# condition evaluation


def holds(b: BeliefState, c: Condition, feas=None) -> bool:
    """Evaluate one ground condition against a belief state.

    Feasible conditions are delegated to the feasibility registry, which
    must be passed in whenever the model uses guards.
    """
    if c.kind == FEASIBLE:
        if feas is None:
            raise ValueError(f"no feasibility registry for query {c.query}")
        return feas.check(c.query)
    k = b.entries[c.inst.index]
    if c.kind == EQ:
        return isinstance(k, Known) and k.value == c.value
    if c.kind == NEQ:
        if isinstance(k, Known):
            return k.value != c.value
        return c.value in k.excluded
    if c.kind == KNOWN:
        return isinstance(k, Known)
    if c.kind == UNKNOWN:
        return isinstance(k, Unknown)
    raise ValueError(f"unknown condition kind {c.kind!r}")


Step = Union[GroundSensing, Iterable[GroundAction]]


def applicable(b: BeliefState, step: Step, feas=None) -> bool:
    """A sensing step needs its preconditions and an Unknown target; an
    actuation set needs every member's preconditions, pairwise disjoint
    writes and no shared mutex token.  Multi-action steps additionally
    require the domain's concurrency option."""
    if isinstance(step, GroundSensing):
        if not isinstance(b.entries[step.target.index], Unknown):
            return False
        return all(holds(b, c, feas) for c in step.pre)
    acts = list(step)
    if len(acts) > 1:
        if not b.model.concurrency:
            return False
        seen_writes: set[FluentInstance] = set()
        seen_tokens: dict[str, int] = {}
        for i, a in enumerate(acts):
            if seen_writes & a.writes:
                return False
            seen_writes |= a.writes
            for t in a.mutex:
                if t in seen_tokens:
                    return False
                seen_tokens[t] = i
    for a in acts:
        if not all(holds(b, c, feas) for c in a.pre):
            return False
    return True


# ---------------------------------------------------------------------------
# transitions


def apply_actuation(b: BeliefState, step: Iterable[GroundAction]) -> BeliefState:
    """Apply a set of concurrent actuation actions and re-close.

    Precondition: applicable(b, step).  Unwritten fluents persist.
    """
    entries = list(b.entries)
    assigned: dict[int, str] = {}
    for a in step:
        for e in a.eff:
            idx = e.inst.index
            if e.kind == ASSIGN:
                if idx in assigned and assigned[idx] != e.value:
                    raise ValueError(
                        f"conflicting writes to {e.inst} in one concurrent step"
                    )
                assigned[idx] = e.value
                entries[idx] = Known(e.value)
            else:
                k = entries[idx]
                if isinstance(k, Known):
                    if k.value == e.value:
                        raise InconsistentBelief(
                            f"excluding the known value {e.value} of {e.inst}"
                        )
                else:
                    entries[idx] = Unknown(k.excluded | {e.value})
    return closure(BeliefState(b.model, entries))


def outcomes(b: BeliefState, s: GroundSensing) -> tuple[str, ...]:
    """Possible results of a sensing action, in domain declaration order.

    Precondition: applicable(b, {s}).  Closure keeps candidate sets exact,
    so this is the target's candidate set; it always has >= 2 members
    because singletons get promoted to Known.
    """
    k = b.entries[s.target.index]
    if isinstance(k, Known):
        raise IllegalOutcome(f"sensing {s} of a Known fluent")
    return b.candidates(s.target.index)


def apply_sensing(b: BeliefState, s: GroundSensing, outcome: str) -> BeliefState:
    """Record one sensing result and re-close."""
    if outcome not in outcomes(b, s):
        raise IllegalOutcome(f"{s}: outcome {outcome!r} not possible")
    entries = list(b.entries)
    entries[s.target.index] = Known(outcome)
    return closure(BeliefState(b.model, entries))


# ---------------------------------------------------------------------------
# equivalence keys


def equiv_key(b: BeliefState, rules: Sequence[GroundRedundancy] = ()) -> str:
    """Canonical key of the belief restricted to non-redundant fluents.

    A fluent is redundant when some rule targeting it has a guard that
    holds in b.  Beliefs with equal keys are interchangeable for planning
    purposes, assuming the rules are sound for the goal at hand.
    """
    skip: set[int] = set()
    for r in rules:
        if r.target.index in skip:
            continue
        if all(holds(b, c) for c in r.guard):
            skip.add(r.target.index)
    parts = []
    for inst in b.model.instances:
        if inst.index in skip:
            continue
        parts.append(f"{inst}={b.entries[inst.index]!r}")
    return ";".join(parts)


# ---------------------------------------------------------------------------
# initial belief


def initial_belief(model: GroundModel, problem: ProblemSpec) -> BeliefState:
    """Build and close the initial belief from init facts and defaults."""
    known: dict[int, str] = {}
    excluded: dict[int, set[str]] = {}
    for fact in problem.init:
        name, args = fact.pattern.name, fact.pattern.args
        key = (name, args)
        if key not in model.index_of:
            raise InconsistentBelief(f"{fact.span}: unknown instance {fact.pattern}")
        idx = model.index_of[key]
        decl = model.instances[idx].decl
        if fact.value not in decl.domain:
            raise InconsistentBelief(
                f"{fact.span}: value '{fact.value}' not in domain of {name}"
            )
        if fact.positive:
            if idx in known and known[idx] != fact.value:
                raise InconsistentBelief(
                    f"{fact.span}: two initial values for {fact.pattern}"
                )
            known[idx] = fact.value
        else:
            excluded.setdefault(idx, set()).add(fact.value)
    for idx, v in known.items():
        if v in excluded.get(idx, ()):
            raise InconsistentBelief(
                f"initial facts both assert and exclude {model.instances[idx]}={v}"
            )

    # Defaults fill instances without an explicit Known fact; exclusion
    # defaults apply first, value defaults only when not contradicted.
    for positive_pass in (False, True):
        for d in model.domain.defaults:
            if d.positive is not positive_pass:
                continue
            decl = model.domain.fluents.get(d.pattern.name)
            if decl is None:
                raise InconsistentBelief(f"{d.span}: unknown fluent {d.pattern.name}")
            rule_params = tuple(
                (a, s) for a, s in zip(d.pattern.args, decl.params) if is_var(a)
            )
            for binding in _bindings(model.domain, rule_params, d.span):
                name, args = d.pattern.substitute(binding)
                idx = model.index_of.get((name, args))
                if idx is None:
                    raise InconsistentBelief(f"{d.span}: no instance {name}{args}")
                if idx in known:
                    continue
                if d.positive:
                    if d.value not in excluded.get(idx, ()):
                        known[idx] = d.value
                else:
                    excluded.setdefault(idx, set()).add(d.value)

    entries: list[Knowledge] = []
    for idx, inst in enumerate(model.instances):
        if idx in known:
            entries.append(Known(known[idx]))
        elif inst.decl.fully_observable:
            raise InconsistentBelief(
                f"fully observable {inst} has no initial value"
            )
        else:
            entries.append(Unknown(frozenset(excluded.get(idx, ()))))
    return closure(BeliefState(model, entries))


def goal_conditions(model: GroundModel, problem: ProblemSpec) -> tuple[Condition, ...]:
    return tuple(ground_conditions(model, problem.goal))


def goal_holds(
    b: BeliefState, goal: Sequence[Condition], feas=None
) -> bool:
    return all(holds(b, c, feas) for c in goal)
