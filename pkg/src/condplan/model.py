"""Ground planning vocabulary: fluents, actions, sensing, constraints.

A domain is declared in terms of sorts (finite object sets), multi-valued
fluents, actuation action schemas, sensing action schemas, cardinality
constraints over value literals, redundancy rules and feasibility guards.
Grounding instantiates every schema over the declared objects and produces
a GroundModel with a fixed, deterministic ordering of instances and actions.

Identifiers starting with an upper-case letter are variables (schema
parameters, constraint/rule variables); everything else is a constant.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

FULL = "full"
PARTIAL = "partial"


class GroundingError(Exception):
    """Raised when a domain cannot be instantiated over its objects."""


def is_var(token: str) -> bool:
    return bool(token) and token[0].isupper()


@dataclass(frozen=True)
class SourceSpan:
    """Position of a construct in its source text (1-based)."""

    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


_NOWHERE = SourceSpan("<builtin>", 0, 0)


@dataclass(frozen=True)
class FluentDecl:
    """A multi-valued fluent template: name, parameter sorts, value domain."""

    name: str
    params: tuple[str, ...]
    domain: tuple[str, ...]
    observability: str  # FULL or PARTIAL
    span: SourceSpan = field(default=_NOWHERE, compare=False)

    @property
    def fully_observable(self) -> bool:
        return self.observability == FULL


@dataclass(frozen=True)
class FluentInstance:
    """A ground fluent: declaration applied to concrete objects."""

    name: str
    args: tuple[str, ...]
    decl: FluentDecl = field(compare=False, hash=False)
    index: int = field(default=-1, compare=False, hash=False)

    def __str__(self) -> str:
        if self.args:
            return f"{self.name}({','.join(self.args)})"
        return self.name


@dataclass(frozen=True)
class Pattern:
    """A fluent reference with variable or constant arguments."""

    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.args:
            return f"{self.name}({','.join(self.args)})"
        return self.name

    def substitute(self, binding: dict[str, str]) -> tuple[str, tuple[str, ...]]:
        return self.name, tuple(binding.get(a, a) for a in self.args)


# Schema-level conditions and effects.  The value slot may be a variable.
EQ = "eq"
NEQ = "neq"
KNOWN = "known"
UNKNOWN = "unknown"
FEASIBLE = "feasible"

ASSIGN = "assign"
EXCLUDE = "exclude"


@dataclass(frozen=True)
class SchemaCond:
    kind: str
    pattern: Optional[Pattern] = None
    value: Optional[str] = None
    query: Optional[Pattern] = None  # for FEASIBLE
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class SchemaEff:
    kind: str  # ASSIGN or EXCLUDE
    pattern: Pattern
    value: str
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]  # (variable, sort)
    pre: tuple[SchemaCond, ...] = ()
    eff: tuple[SchemaEff, ...] = ()
    mutex: tuple[Pattern, ...] = ()
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class SensingSchema:
    name: str
    params: tuple[tuple[str, str], ...]
    target: Pattern = Pattern("?")
    pre: tuple[SchemaCond, ...] = ()
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class ConstraintDecl:
    """Cardinality bound over a set of value literals built by comprehension."""

    lower: Optional[int]
    upper: Optional[int]
    templates: tuple[tuple[Pattern, str], ...]  # (fluent pattern, value term)
    gens: tuple[tuple[str, str], ...]  # (variable, sort)
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class RedundancyDecl:
    """Marks a fluent as goal-irrelevant whenever the guard holds."""

    target: Pattern
    guard: tuple[SchemaCond, ...]
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class GuardDecl:
    """Attaches a feasibility query to an action or sensing schema by name."""

    action: str
    params: tuple[str, ...]  # positional rebinding of the schema parameters
    query: Pattern
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class DefaultDecl:
    """Initial-state default: pattern = value or pattern != value."""

    pattern: Pattern
    positive: bool  # True for '=', False for '!='
    value: str
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class InitFact:
    pattern: Pattern  # ground
    positive: bool  # True: Known(value); False: Exclude(value)
    value: str
    span: SourceSpan = field(default=_NOWHERE, compare=False)


@dataclass(frozen=True)
class DomainSpec:
    name: str
    sorts: dict[str, tuple[str, ...]]
    fluents: dict[str, FluentDecl]
    actions: tuple[ActionSchema, ...]
    sensings: tuple[SensingSchema, ...]
    constraints: tuple[ConstraintDecl, ...]
    redundancies: tuple[RedundancyDecl, ...]
    guards: tuple[GuardDecl, ...]
    defaults: tuple[DefaultDecl, ...]
    concurrency: bool = False


@dataclass(frozen=True)
class ProblemSpec:
    init: tuple[InitFact, ...]
    goal: tuple[SchemaCond, ...]  # ground conditions


@dataclass(frozen=True)
class FeasibilityQuery:
    name: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.name}({','.join(self.args)})"


@dataclass(frozen=True)
class Condition:
    """Ground condition over a belief state."""

    kind: str  # EQ, NEQ, KNOWN, UNKNOWN, FEASIBLE
    inst: Optional[FluentInstance] = None
    value: Optional[str] = None
    query: Optional[FeasibilityQuery] = None

    def __str__(self) -> str:
        if self.kind == EQ:
            return f"{self.inst} = {self.value}"
        if self.kind == NEQ:
            return f"{self.inst} != {self.value}"
        if self.kind == FEASIBLE:
            return f"feasible {self.query}"
        return f"{self.kind} {self.inst}"


@dataclass(frozen=True)
class Effect:
    kind: str  # ASSIGN or EXCLUDE
    inst: FluentInstance
    value: str


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: tuple[Condition, ...]
    eff: tuple[Effect, ...]
    mutex: frozenset[str]
    writes: frozenset[FluentInstance] = field(compare=False, hash=False)
    index: int = field(default=-1, compare=False, hash=False)

    @property
    def key(self) -> str:
        if self.args:
            return f"{self.name}({','.join(self.args)})"
        return self.name

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True)
class GroundSensing:
    name: str
    args: tuple[str, ...]
    target: FluentInstance
    pre: tuple[Condition, ...]
    index: int = field(default=-1, compare=False, hash=False)

    @property
    def key(self) -> str:
        if self.args:
            return f"{self.name}({','.join(self.args)})"
        return self.name

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True)
class GroundConstraint:
    """Bound on how many of the listed (instance, value) literals hold."""

    literals: tuple[tuple[int, str], ...]  # (instance index, value)
    lower: int
    upper: Optional[int]  # None means unbounded above
    index: int = field(default=-1, compare=False, hash=False)


@dataclass(frozen=True)
class GroundRedundancy:
    target: FluentInstance
    guard: tuple[Condition, ...]


class GroundModel:
    """A fully instantiated domain with deterministic orderings.

    Instances, actions and sensing actions are sorted by (name, args) so
    that grounding the same DomainSpec always yields identical indices.
    """

    def __init__(
        self,
        domain: DomainSpec,
        instances: list[FluentInstance],
        actions: list[GroundAction],
        sensings: list[GroundSensing],
        constraints: list[GroundConstraint],
        redundancies: list[GroundRedundancy],
    ):
        self.domain = domain
        self.instances: tuple[FluentInstance, ...] = tuple(instances)
        self.actions: tuple[GroundAction, ...] = tuple(actions)
        self.sensings: tuple[GroundSensing, ...] = tuple(sensings)
        self.constraints: tuple[GroundConstraint, ...] = tuple(constraints)
        self.redundancies: tuple[GroundRedundancy, ...] = tuple(redundancies)
        self.concurrency = domain.concurrency
        self.index_of: dict[tuple[str, tuple[str, ...]], int] = {
            (inst.name, inst.args): i for i, inst in enumerate(self.instances)
        }
        self.action_by_key = {a.key: a for a in self.actions}
        self.sensing_by_key = {s.key: s for s in self.sensings}
        # Per-instance list of (constraint, values of this instance in it).
        self.inst_constraints: list[list[tuple[GroundConstraint, frozenset[str]]]] = [
            [] for _ in self.instances
        ]
        for c in self.constraints:
            by_inst: dict[int, set[str]] = {}
            for idx, v in c.literals:
                by_inst.setdefault(idx, set()).add(v)
            for idx, vals in by_inst.items():
                self.inst_constraints[idx].append((c, frozenset(vals)))
        self._build_components()

    def _build_components(self) -> None:
        # Union constraints that share an instance; closure treats each
        # connected component independently.
        parent = list(range(len(self.constraints)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        first_seen: dict[int, int] = {}
        for ci, c in enumerate(self.constraints):
            for idx, _ in c.literals:
                if idx in first_seen:
                    a, b = find(first_seen[idx]), find(ci)
                    if a != b:
                        parent[b] = a
                else:
                    first_seen[idx] = ci
        groups: dict[int, list[int]] = {}
        for ci in range(len(self.constraints)):
            groups.setdefault(find(ci), []).append(ci)
        self.components: tuple[tuple[GroundConstraint, ...], ...] = tuple(
            tuple(self.constraints[ci] for ci in sorted(members))
            for _, members in sorted(groups.items())
        )
        self.component_of: list[Optional[int]] = [None] * len(self.instances)
        self.component_insts: list[tuple[int, ...]] = []
        for gi, comp in enumerate(self.components):
            insts = sorted({idx for c in comp for idx, _ in c.literals})
            self.component_insts.append(tuple(insts))
            for idx in insts:
                self.component_of[idx] = gi

    def instance(self, name: str, args: Iterable[str] = ()) -> FluentInstance:
        key = (name, tuple(args))
        if key not in self.index_of:
            raise KeyError(f"unknown fluent instance {key[0]}{key[1]}")
        return self.instances[self.index_of[key]]


def _objects(domain: DomainSpec, sort: str, span: SourceSpan) -> tuple[str, ...]:
    if sort not in domain.sorts:
        raise GroundingError(f"{span}: unknown sort '{sort}'")
    objs = domain.sorts[sort]
    if not objs:
        raise GroundingError(f"{span}: sort '{sort}' has no objects")
    return objs


def _bindings(
    domain: DomainSpec, params: tuple[tuple[str, str], ...], span: SourceSpan
) -> Iterable[dict[str, str]]:
    if not params:
        yield {}
        return
    pools = [_objects(domain, sort, span) for _, sort in params]
    names = [p for p, _ in params]
    for combo in itertools.product(*pools):
        yield dict(zip(names, combo))


def _ground_pattern(
    model_index: dict[tuple[str, tuple[str, ...]], int],
    instances: list[FluentInstance],
    pat: Pattern,
    binding: dict[str, str],
    span: SourceSpan,
) -> FluentInstance:
    name, args = pat.substitute(binding)
    key = (name, args)
    if key not in model_index:
        raise GroundingError(f"{span}: no fluent instance {name}({','.join(args)})")
    return instances[model_index[key]]


def _subst_value(term: str, binding: dict[str, str], span: SourceSpan) -> str:
    if is_var(term):
        if term not in binding:
            raise GroundingError(f"{span}: unbound variable '{term}'")
        return binding[term]
    return term


def _ground_cond(
    index: dict[tuple[str, tuple[str, ...]], int],
    instances: list[FluentInstance],
    cond: SchemaCond,
    binding: dict[str, str],
) -> Condition:
    if cond.kind == FEASIBLE:
        assert cond.query is not None
        name, args = cond.query.substitute(binding)
        for a in args:
            if is_var(a):
                raise GroundingError(f"{cond.span}: unbound variable '{a}' in query")
        return Condition(FEASIBLE, query=FeasibilityQuery(name, args))
    assert cond.pattern is not None
    inst = _ground_pattern(index, instances, cond.pattern, binding, cond.span)
    if cond.kind in (EQ, NEQ):
        assert cond.value is not None
        value = _subst_value(cond.value, binding, cond.span)
        if value not in inst.decl.domain:
            raise GroundingError(
                f"{cond.span}: value '{value}' not in domain of {inst.name}"
            )
        return Condition(cond.kind, inst=inst, value=value)
    return Condition(cond.kind, inst=inst)


def ground_conditions(
    model: "GroundModel", conds: Iterable[SchemaCond]
) -> list[Condition]:
    """Ground already-variable-free schema conditions against a model."""
    return [
        _ground_cond(model.index_of, list(model.instances), c, {}) for c in conds
    ]


def ground(domain: DomainSpec) -> GroundModel:
    """Instantiate all schemas of a domain over its declared objects."""

    instances: list[FluentInstance] = []
    for decl in sorted(domain.fluents.values(), key=lambda d: d.name):
        pools = [_objects(domain, s, decl.span) for s in decl.params]
        for combo in itertools.product(*pools):
            instances.append(FluentInstance(decl.name, tuple(combo), decl))
    instances.sort(key=lambda i: (i.name, i.args))
    instances = [
        FluentInstance(i.name, i.args, i.decl, index=n) for n, i in enumerate(instances)
    ]
    index = {(i.name, i.args): i.index for i in instances}

    guards_by_action: dict[str, list[GuardDecl]] = {}
    for g in domain.guards:
        guards_by_action.setdefault(g.action, []).append(g)

    def guard_conds(
        schema_name: str,
        params: tuple[tuple[str, str], ...],
        binding: dict[str, str],
    ) -> list[Condition]:
        out = []
        for g in guards_by_action.get(schema_name, ()):
            if len(g.params) != len(params):
                raise GroundingError(
                    f"{g.span}: guard for '{schema_name}' names "
                    f"{len(g.params)} parameters, schema has {len(params)}"
                )
            rebind = {
                gp: binding[sp] for gp, (sp, _) in zip(g.params, params) if is_var(gp)
            }
            name, args = g.query.substitute(rebind)
            for a in args:
                if is_var(a):
                    raise GroundingError(f"{g.span}: unbound variable '{a}' in query")
            out.append(Condition(FEASIBLE, query=FeasibilityQuery(name, args)))
        return out

    actions: list[GroundAction] = []
    for schema in domain.actions:
        for binding in _bindings(domain, schema.params, schema.span):
            pre = [_ground_cond(index, instances, c, binding) for c in schema.pre]
            pre += guard_conds(schema.name, schema.params, binding)
            eff = []
            writes = set()
            for e in schema.eff:
                inst = _ground_pattern(index, instances, e.pattern, binding, e.span)
                value = _subst_value(e.value, binding, e.span)
                if value not in inst.decl.domain:
                    raise GroundingError(
                        f"{e.span}: value '{value}' not in domain of {inst.name}"
                    )
                if e.kind == EXCLUDE and inst.decl.fully_observable:
                    raise GroundingError(
                        f"{e.span}: exclude effect on fully observable {inst.name}"
                    )
                eff.append(Effect(e.kind, inst, value))
                writes.add(inst)
            for a, b in itertools.combinations(
                [e for e in eff if e.kind == ASSIGN], 2
            ):
                if a.inst == b.inst and a.value != b.value:
                    raise GroundingError(
                        f"{schema.span}: action {schema.name} assigns two values "
                        f"to {a.inst}"
                    )
            tokens = frozenset(
                "{}({})".format(m.name, ",".join(binding.get(a, a) for a in m.args))
                if m.args
                else m.name
                for m in schema.mutex
            )
            actions.append(
                GroundAction(
                    schema.name,
                    tuple(binding[p] for p, _ in schema.params),
                    tuple(pre),
                    tuple(eff),
                    tokens,
                    frozenset(writes),
                )
            )
    actions.sort(key=lambda a: (a.name, a.args))
    actions = [
        GroundAction(a.name, a.args, a.pre, a.eff, a.mutex, a.writes, index=n)
        for n, a in enumerate(actions)
    ]

    sensings: list[GroundSensing] = []
    for schema in domain.sensings:
        for binding in _bindings(domain, schema.params, schema.span):
            target = _ground_pattern(
                index, instances, schema.target, binding, schema.span
            )
            if target.decl.fully_observable:
                raise GroundingError(
                    f"{schema.span}: sensing '{schema.name}' targets fully "
                    f"observable fluent {target.name}"
                )
            pre = [_ground_cond(index, instances, c, binding) for c in schema.pre]
            pre += guard_conds(schema.name, schema.params, binding)
            sensings.append(
                GroundSensing(
                    schema.name,
                    tuple(binding[p] for p, _ in schema.params),
                    target,
                    tuple(pre),
                )
            )
    sensings.sort(key=lambda s: (s.name, s.args))
    sensings = [
        GroundSensing(s.name, s.args, s.target, s.pre, index=n)
        for n, s in enumerate(sensings)
    ]

    constraints: list[GroundConstraint] = []
    for cd in domain.constraints:
        lits: list[tuple[int, str]] = []
        seen = set()
        for binding in _bindings(domain, cd.gens, cd.span):
            for pat, vterm in cd.templates:
                inst = _ground_pattern(index, instances, pat, binding, cd.span)
                value = _subst_value(vterm, binding, cd.span)
                if value not in inst.decl.domain:
                    raise GroundingError(
                        f"{cd.span}: value '{value}' not in domain of {inst.name}"
                    )
                lit = (inst.index, value)
                if lit not in seen:
                    seen.add(lit)
                    lits.append(lit)
        lits.sort()
        lower = cd.lower if cd.lower is not None else 0
        if lower > len(lits):
            raise GroundingError(
                f"{cd.span}: lower bound {lower} exceeds literal count {len(lits)}"
            )
        if cd.upper is not None and lower > cd.upper:
            raise GroundingError(f"{cd.span}: lower bound exceeds upper bound")
        constraints.append(
            GroundConstraint(tuple(lits), lower, cd.upper, index=len(constraints))
        )

    redundancies: list[GroundRedundancy] = []
    for rd in domain.redundancies:
        if rd.target.name not in domain.fluents:
            raise GroundingError(f"{rd.span}: unknown fluent '{rd.target.name}'")
        decl = domain.fluents[rd.target.name]
        if len(rd.target.args) != len(decl.params):
            raise GroundingError(f"{rd.span}: arity mismatch for '{decl.name}'")
        rule_params = tuple(
            (arg, sort)
            for arg, sort in zip(rd.target.args, decl.params)
            if is_var(arg)
        )
        for binding in _bindings(domain, rule_params, rd.span):
            target = _ground_pattern(index, instances, rd.target, binding, rd.span)
            guard = tuple(
                _ground_cond(index, instances, c, binding) for c in rd.guard
            )
            redundancies.append(GroundRedundancy(target, guard))
    redundancies.sort(key=lambda r: (r.target.name, r.target.args))

    return GroundModel(domain, instances, actions, sensings, constraints, redundancies)
