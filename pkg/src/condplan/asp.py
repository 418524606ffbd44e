"""Logic-program emission for conditional planning domains.

The native engine searches belief space directly; this module is the
bridge to answer-set solving.  ``emit`` turns a declared domain and
problem into a three-part incremental program -- ``base`` (static facts,
initial knowledge, step-0 action candidates), ``step(t)`` (inertia,
knowledge propagation, action candidates, effects, sensing outcomes) and
``check(t)`` (state consistency, preconditions, goal test) -- in the
dialect of incremental grounders, where the horizon grows until the
``query`` external is satisfiable.

Knowledge is encoded with explicit truth values: ``f(x,v,t)`` says the
value of ``f(x)`` is known to be ``v`` at step ``t`` and ``-f(x,v,t)``
says ``v`` is known to be excluded.  A fluent with neither atom is
unknown, which is what sensing resolves: ``sense(f(x),t)`` forces exactly
one value atom to hold at ``t+1``.  Fully observable fluents additionally
carry an existence constraint, so they always have a known value.

``run_external`` pipes the combined program to a solver binary named by
the ``CONDPLAN_SOLVER`` environment variable and parses the occurrence
atoms of one answer set back into (name, args, step) records.  The solver
is optional equipment: callers should treat ``SolverUnavailable`` as a
skip, never a failure.
"""

from __future__ import annotations

import itertools
import os
import re
import subprocess
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .model import (
    ASSIGN,
    EQ,
    EXCLUDE,
    FEASIBLE,
    KNOWN,
    NEQ,
    UNKNOWN,
    ActionSchema,
    DomainSpec,
    FluentDecl,
    Pattern,
    ProblemSpec,
    SchemaCond,
    SensingSchema,
    is_var,
)

DEFAULT_STEP_LIMIT = 40

_TMIN = "time_min"
_TNOW = "t+time_min"
_TPREV = "t+time_min-1"

_WIDTH = 78


class EmitError(Exception):
    """Raised when a domain uses a construct the encoding cannot express."""


class SolverUnavailable(Exception):
    """No solver binary is configured or the configured one cannot run."""


class SolverOutputError(Exception):
    """The solver produced output that does not parse as an answer set."""


class Unsatisfiable(Exception):
    """The solver reported that no plan exists within the step limit."""


@dataclass(frozen=True)
class EncodedProgram:
    """The three program parts plus their solver-ready concatenation."""

    base: str
    step: str
    check: str
    combined: str
    occurrences: tuple[str, ...] = ()


class SolvedAction(NamedTuple):
    """One occurrence atom from an answer set."""

    name: str
    args: tuple[str, ...]
    time: int


def _atom(name: str, args: tuple[str, ...]) -> str:
    if args:
        return f"{name}({','.join(args)})"
    return name


def _fresh(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}{i}" in taken:
        i += 1
    return f"{base}{i}"


def _wrap(rule: str) -> str:
    """Break a rule at top-level commas so no line exceeds the width."""
    if len(rule) <= _WIDTH:
        return rule
    depth = 0
    cuts = []
    for i in range(len(rule) - 1):
        ch = rule[i]
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        elif ch == "," and depth == 0 and rule[i + 1] == " ":
            cuts.append(i + 2)
        elif ch == ";" and depth == 1 and rule[i + 1] == " ":
            cuts.append(i + 2)  # aggregate element boundaries
    head = rule.find(":- ")
    if head >= 0 and head + 3 not in cuts:
        cuts.append(head + 3)
    cuts.sort()
    lines: list[str] = []
    start = 0
    prev = None
    for cut in cuts + [len(rule)]:
        limit = _WIDTH if not lines else _WIDTH - 2
        if cut - start > limit and prev is not None and prev > start:
            lines.append(rule[start:prev].rstrip())
            start = prev
        prev = cut
    lines.append(rule[start:])
    return lines[0] + "".join("\n  " + ln for ln in lines[1:])


class _Emitter:
    def __init__(self, domain: DomainSpec, problem: ProblemSpec) -> None:
        self.dom = domain
        self.prob = problem
        # one sensing schema per target fluent; the sense atom only names
        # the target, so two schemas on one fluent would be conflated
        seen: dict[str, SensingSchema] = {}
        for s in domain.sensings:
            if s.target.name in seen:
                raise EmitError(
                    f"two sensing actions observe {s.target.name}; the "
                    "encoding identifies a sensing by its target fluent"
                )
            seen[s.target.name] = s

    # ------------------------------------------------------------------
    # shared pieces

    def _decl(self, name: str) -> FluentDecl:
        try:
            return self.dom.fluents[name]
        except KeyError:
            raise EmitError(f"unknown fluent {name!r} in emission") from None

    def _param_vars(self, decl: FluentDecl) -> tuple[str, ...]:
        return tuple(f"X{i + 1}" for i in range(len(decl.params)))

    def _sort_guards(self, decl: FluentDecl, vars_: tuple[str, ...]) -> list[str]:
        return [f"{sort}({v})" for sort, v in zip(decl.params, vars_)]

    def _fluent_atom(
        self, name: str, args: tuple[str, ...], value: str, t: str
    ) -> str:
        return _atom(name, args + (value, t))

    def _schema_vars(self, schema) -> dict[str, str]:
        return {var: sort for var, sort in schema.params}

    def _schema_guards(self, schema) -> list[str]:
        return [f"{sort}({var})" for var, sort in schema.params]

    def _action_atom(self, schema: ActionSchema, t: str) -> str:
        return _atom(schema.name, tuple(v for v, _ in schema.params) + (t,))

    def _sense_atom(self, schema: SensingSchema, t: str) -> str:
        return f"sense({schema.target},{t})"

    def _target_guards(self, schema: SensingSchema) -> list[str]:
        sorts = self._schema_vars(schema)
        out = []
        for a in schema.target.args:
            if is_var(a):
                out.append(f"{sorts[a]}({a})")
        return out

    def _known_count(
        self, name: str, args: tuple[str, ...], t: str, taken: set[str]
    ) -> str:
        """Aggregate counting the known values of one fluent instance."""
        v = _fresh("V", taken)
        return f"{{{self._fluent_atom(name, args, v, t)}:dom_{name}({v})}}"

    def _cond_neg(self, cond: SchemaCond, t: str, taken: set[str]) -> str:
        """Body literal that holds exactly when the condition fails."""
        pat = cond.pattern
        assert pat is not None
        if cond.kind == EQ:
            return f"not {self._fluent_atom(pat.name, pat.args, cond.value, t)}"
        if cond.kind == NEQ:
            return f"not -{self._fluent_atom(pat.name, pat.args, cond.value, t)}"
        if cond.kind == KNOWN:
            return self._known_count(pat.name, pat.args, t, taken) + "0"
        if cond.kind == UNKNOWN:
            return "1" + self._known_count(pat.name, pat.args, t, taken)
        raise EmitError(f"condition kind {cond.kind!r} has no encoding")

    def _cond_pos(self, cond: SchemaCond, t: str, taken: set[str]) -> str:
        """Body literal that holds exactly when the condition holds."""
        pat = cond.pattern
        assert pat is not None
        if cond.kind == EQ:
            return self._fluent_atom(pat.name, pat.args, cond.value, t)
        if cond.kind == NEQ:
            return "-" + self._fluent_atom(pat.name, pat.args, cond.value, t)
        if cond.kind == KNOWN:
            return "1" + self._known_count(pat.name, pat.args, t, taken)
        if cond.kind == UNKNOWN:
            return self._known_count(pat.name, pat.args, t, taken) + "0"
        raise EmitError(f"condition kind {cond.kind!r} has no encoding")

    # ------------------------------------------------------------------
    # rule groups

    def _sort_facts(self) -> list[str]:
        return [
            f"{name}({';'.join(objs)})."
            for name, objs in self.dom.sorts.items()
        ]

    def _dom_facts(self) -> list[str]:
        out = []
        for decl in self.dom.fluents.values():
            out.append(f"dom_{decl.name}({';'.join(decl.domain)}).")
            out.append(f"#const dom_{decl.name}_size={len(decl.domain)}.")
        return out

    def _init_facts(self) -> list[str]:
        out = []
        for fact in self.prob.init:
            atom = self._fluent_atom(
                fact.pattern.name, fact.pattern.args, fact.value, _TMIN
            )
            out.append(f"{atom}." if fact.positive else f"-{atom}.")
        return out

    def _defaults(self) -> list[str]:
        out = []
        for d in self.dom.defaults:
            decl = self._decl(d.pattern.name)
            guards = [
                f"{sort}({a})"
                for sort, a in zip(decl.params, d.pattern.args)
                if is_var(a)
            ]
            atom = self._fluent_atom(
                d.pattern.name, d.pattern.args, d.value, _TMIN
            )
            body = ", ".join([f"not {'-' if d.positive else ''}{atom}"] + guards)
            head = atom if d.positive else f"-{atom}"
            out.append(f"{head} :- {body}.")
        return out

    def _propagation(self, t: str) -> list[str]:
        """Knowledge closure: value exclusivity and last-candidate promotion."""
        out = []
        for decl in self.dom.fluents.values():
            xs = self._param_vars(decl)
            guards = self._sort_guards(decl, xs)
            f = decl.name
            a_v = self._fluent_atom(f, xs, "V", t)
            a_v1 = self._fluent_atom(f, xs, "V1", t)
            out.append(
                _wrap(
                    f"-{a_v} :- {a_v1}, "
                    + ", ".join(guards + [f"dom_{f}(V)", f"dom_{f}(V1)", "V!=V1"])
                    + "."
                )
            )
            size = f"dom_{f}_size-1"
            agg = f"{size}{{-{a_v1}:dom_{f}(V1),V1!=V}}{size}"
            out.append(
                _wrap(
                    f"{a_v} :- {agg}, "
                    + ", ".join(guards + [f"dom_{f}(V)"])
                    + "."
                )
            )
        out.extend(self._constraint_propagation(t))
        return out

    def _family(self, con) -> list[tuple[str, tuple[str, ...], str]]:
        """Ground literal family of a cardinality constraint."""
        gens = con.gens
        names = [v for v, _ in gens]
        pools = [self.dom.sorts[s] for _, s in gens]
        seen = []
        for combo in itertools.product(*pools) if gens else [()]:
            bind = dict(zip(names, combo))
            for pat, val in con.templates:
                name, args = pat.substitute(bind)
                v = bind.get(val, val)
                lit = (name, args, v)
                if lit not in seen:
                    seen.append(lit)
        return seen

    def _constraint_propagation(self, t: str) -> list[str]:
        # only the single-template exactly-one family supports schematic
        # promotion; anything wider is enforced by the count constraints
        out = []
        for con in self.dom.constraints:
            if not (
                con.lower == 1
                and con.upper == 1
                and len(con.templates) == 1
                and len(con.gens) == 1
            ):
                continue
            pat, val = con.templates[0]
            var, sort = con.gens[0]
            if is_var(val) or var not in pat.args:
                continue
            size = len(self.dom.sorts[sort])
            x, y = "X1", "Y1"
            args_x = tuple(x if a == var else a for a in pat.args)
            args_y = tuple(y if a == var else a for a in pat.args)
            a_x = self._fluent_atom(pat.name, args_x, val, t)
            a_y = self._fluent_atom(pat.name, args_y, val, t)
            out.append(
                _wrap(
                    f"-{a_x} :- {a_y}, {sort}({x}), {sort}({y}), {x}!={y}."
                )
            )
            agg = f"{size - 1}{{-{a_y}:{sort}({y}),{y}!={x}}}{size - 1}"
            out.append(_wrap(f"{a_x} :- {agg}, {sort}({x})."))
        return out

    def _choices(self, t: str) -> list[str]:
        out = []
        for schema in self.dom.actions:
            head = f"{{{self._action_atom(schema, t)}}}"
            guards = self._schema_guards(schema)
            out.append(
                _wrap(f"{head} :- {', '.join(guards)}." if guards else f"{head}.")
            )
        for schema in self.dom.sensings:
            head = f"{{{self._sense_atom(schema, t)}}}"
            guards = self._target_guards(schema)
            out.append(
                _wrap(f"{head} :- {', '.join(guards)}." if guards else f"{head}.")
            )
        return out

    def _inertia(self) -> list[str]:
        out = []
        for decl in self.dom.fluents.values():
            xs = self._param_vars(decl)
            guards = self._sort_guards(decl, xs) + [f"dom_{decl.name}(V)"]
            now = self._fluent_atom(decl.name, xs, "V", _TNOW)
            prev = self._fluent_atom(decl.name, xs, "V", _TPREV)
            out.append(
                _wrap(f"{now} :- not -{now}, {prev}, " + ", ".join(guards) + ".")
            )
            out.append(
                _wrap(f"-{now} :- not {now}, -{prev}, " + ", ".join(guards) + ".")
            )
        return out

    def _effects(self) -> list[str]:
        out = []
        for schema in self.dom.actions:
            occ = self._action_atom(schema, _TPREV)
            guards = self._schema_guards(schema)
            for eff in schema.eff:
                atom = self._fluent_atom(
                    eff.pattern.name, eff.pattern.args, eff.value, _TNOW
                )
                head = atom if eff.kind == ASSIGN else f"-{atom}"
                body = ", ".join([occ] + guards)
                out.append(_wrap(f"{head} :- {body}."))
        return out

    def _outcomes(self) -> list[str]:
        out = []
        for schema in self.dom.sensings:
            tgt = schema.target
            taken = set(tgt.args)
            agg = self._known_count(tgt.name, tgt.args, _TNOW, taken)
            body = ", ".join(
                [self._sense_atom(schema, _TPREV)] + self._target_guards(schema)
            )
            out.append(_wrap(f"1{agg}1 :- {body}."))
        return out

    def _consistency(self) -> list[str]:
        out = []
        for decl in self.dom.fluents.values():
            xs = self._param_vars(decl)
            guards = self._sort_guards(decl, xs)
            agg = self._known_count(decl.name, xs, _TNOW, set(xs))
            tail = (", " + ", ".join(guards)) if guards else ""
            out.append(_wrap(f":- 2{agg}{tail}."))
            if decl.fully_observable:
                out.append(_wrap(f":- {agg}0{tail}."))
        out.extend(self._constraint_checks())
        return out

    def _constraint_checks(self) -> list[str]:
        out = []
        for con in self.dom.constraints:
            elems_pos = []
            elems_neg = []
            for i, (pat, val) in enumerate(con.templates):
                ren = {v: f"{v}{i + 1}" for v, _ in con.gens}
                args = tuple(ren.get(a, a) for a in pat.args)
                value = ren.get(val, val)
                conds = [
                    f"{sort}({ren[v]})"
                    for v, sort in con.gens
                    if v in pat.args or v == val
                ]
                atom = self._fluent_atom(pat.name, args, value, _TNOW)
                cond = (":" + ",".join(conds)) if conds else ""
                elems_pos.append(f"{atom}{cond}")
                elems_neg.append(f"-{atom}{cond}")
            if con.upper is not None:
                out.append(_wrap(f":- {con.upper + 1}{{{'; '.join(elems_pos)}}}."))
            if con.lower is not None and con.lower > 0:
                slack = len(self._family(con)) - con.lower
                out.append(
                    _wrap(f":- {slack + 1}{{{'; '.join(elems_neg)}}}.")
                )
        return out

    def _preconditions(self) -> list[str]:
        out = []
        for schema in self.dom.actions:
            occ = self._action_atom(schema, _TNOW)
            guards = self._schema_guards(schema)
            taken = set(self._schema_vars(schema))
            for cond in schema.pre:
                if cond.kind == FEASIBLE:
                    continue  # emitted with the external-function checks
                lit = self._cond_neg(cond, _TNOW, taken)
                out.append(_wrap(f":- {', '.join([occ] + guards + [lit])}."))
        return out

    def _sense_preconditions(self) -> list[str]:
        out = []
        for schema in self.dom.sensings:
            occ = self._sense_atom(schema, _TNOW)
            tguards = self._target_guards(schema)
            tgt_vars = {a for a in schema.target.args if is_var(a)}
            sorts = self._schema_vars(schema)
            taken = set(sorts)
            # a sensing is pointless once the value is known
            agg = self._known_count(
                schema.target.name, schema.target.args, _TNOW, taken
            )
            out.append(_wrap(f":- {', '.join([occ] + tguards + ['1' + agg])}."))
            for cond in schema.pre:
                if cond.kind == FEASIBLE:
                    continue
                pat = cond.pattern
                assert pat is not None
                extra = {
                    a
                    for a in pat.args + ((cond.value,) if cond.value else ())
                    if is_var(a) and a not in tgt_vars
                }
                if not extra:
                    lit = self._cond_neg(cond, _TNOW, taken)
                    out.append(
                        _wrap(f":- {', '.join([occ] + tguards + [lit])}.")
                    )
                    continue
                if cond.kind not in (EQ, NEQ):
                    raise EmitError(
                        f"sensing {schema.name}: {cond.kind} precondition "
                        "over parameters outside the target has no encoding"
                    )
                # existential reading: some binding of the free parameters
                # must already satisfy the condition
                ren = {v: f"{v}1" for v in extra}
                args = tuple(ren.get(a, a) for a in pat.args)
                value = ren.get(cond.value, cond.value)
                atom = self._fluent_atom(pat.name, args, value, _TNOW)
                if cond.kind == NEQ:
                    atom = "-" + atom
                econds = ",".join(f"{sorts[v]}({ren[v]})" for v in sorted(extra))
                out.append(
                    _wrap(
                        f":- {', '.join([occ] + tguards)}, "
                        f"{{{atom}:{econds}}}0."
                    )
                )
        return out

    def _feasibility(self) -> list[str]:
        out = []
        for schema in self.dom.actions:
            occ = self._action_atom(schema, _TNOW)
            guards = self._schema_guards(schema)
            for q in self._queries_of(schema):
                call = f"@{q.name}({','.join(q.args)})!=1"
                out.append(_wrap(f":- {', '.join([occ] + guards + [call])}."))
        for schema in self.dom.sensings:
            occ = self._sense_atom(schema, _TNOW)
            tguards = self._target_guards(schema)
            tgt_vars = {a for a in schema.target.args if is_var(a)}
            for q in self._queries_of(schema):
                free = [a for a in q.args if is_var(a) and a not in tgt_vars]
                if free:
                    raise EmitError(
                        f"sensing {schema.name}: feasibility query "
                        f"{q.name} uses parameters outside the target"
                    )
                call = f"@{q.name}({','.join(q.args)})!=1"
                out.append(_wrap(f":- {', '.join([occ] + tguards + [call])}."))
        return out

    def _queries_of(self, schema) -> list[Pattern]:
        out = [c.query for c in schema.pre if c.kind == FEASIBLE and c.query]
        params = [v for v, _ in schema.params]
        for g in self.dom.guards:
            if g.action != schema.name:
                continue
            if len(g.params) != len(params):
                raise EmitError(
                    f"feasibility guard for {schema.name} names "
                    f"{len(g.params)} parameters, schema has {len(params)}"
                )
            ren = dict(zip(g.params, params))
            out.append(
                Pattern(g.query.name, tuple(ren.get(a, a) for a in g.query.args))
            )
        return out

    def _target_params(self, schema: SensingSchema) -> list[tuple[str, str]]:
        sorts = self._schema_vars(schema)
        return [(a, sorts[a]) for a in schema.target.args if is_var(a)]

    def _occurrence_count(self, items) -> str:
        """Count aggregate over occurrence atoms with localized variables."""
        elems = []
        for i, (atom, params) in enumerate(items):
            ren = {v: f"{v}_{i + 1}" for v, _ in params}
            for old, new in ren.items():
                atom = re.sub(rf"\b{old}\b", new, atom)
            conds = ",".join(f"{sort}({ren[v]})" for v, sort in params)
            elems.append(f"{atom}:{conds}" if conds else atom)
        return "{" + "; ".join(elems) + "}"

    def _concurrency(self) -> list[str]:
        out = []
        for schema in self.dom.actions:
            body = ", ".join(
                [self._action_atom(schema, _TNOW)] + self._schema_guards(schema)
            )
            out.append(_wrap(f"actAction({_TNOW}) :- {body}."))
        for schema in self.dom.sensings:
            body = ", ".join(
                [self._sense_atom(schema, _TNOW)] + self._target_guards(schema)
            )
            out.append(_wrap(f"sensAction({_TNOW}) :- {body}."))
        if self.dom.actions and self.dom.sensings:
            out.append(f":- actAction({_TNOW}), sensAction({_TNOW}).")
        if self.dom.actions and not self.dom.concurrency:
            agg = self._occurrence_count(
                [
                    (self._action_atom(s, _TNOW), list(s.params))
                    for s in self.dom.actions
                ]
            )
            out.append(_wrap(f":- 2{agg}."))
        if self.dom.concurrency:
            out.extend(self._mutex_rules())
        if self.dom.sensings:
            agg = self._occurrence_count(
                [
                    (self._sense_atom(s, _TNOW), self._target_params(s))
                    for s in self.dom.sensings
                ]
            )
            out.append(_wrap(f":- 2{agg}."))
        return out

    def _mutex_rules(self) -> list[str]:
        # actions sharing a mutex token (with equal token arguments) may
        # not co-occur; the token arguments stay global in the count
        out = []
        tokens: dict[str, int] = {}
        for schema in self.dom.actions:
            for tok in schema.mutex:
                tokens.setdefault(tok.name, len(tok.args))
        for tok_name, arity in tokens.items():
            tok_vars = tuple(f"A{i + 1}" for i in range(arity))
            elems = []
            outer: list[str] = []
            for i, schema in enumerate(self.dom.actions):
                for tok in schema.mutex:
                    if tok.name != tok_name:
                        continue
                    ren = {}
                    sorts = self._schema_vars(schema)
                    for a, tv in zip(tok.args, tok_vars):
                        ren[a] = tv
                        guard = f"{sorts[a]}({tv})"
                        if guard not in outer:
                            outer.append(guard)
                    for v, _ in schema.params:
                        ren.setdefault(v, f"{v}_{i + 1}")
                    args = tuple(ren[v] for v, _ in schema.params) + (_TNOW,)
                    conds = ",".join(
                        f"{sort}({ren[v]})"
                        for v, sort in schema.params
                        if ren[v] not in tok_vars
                    )
                    atom = _atom(schema.name, args)
                    elems.append(f"{atom}:{conds}" if conds else atom)
            body = f"2{{{'; '.join(elems)}}}"
            tail = (", " + ", ".join(outer)) if outer else ""
            out.append(_wrap(f":- {body}{tail}."))
        return out

    def _goal(self) -> list[str]:
        taken: set[str] = set()
        lits = [self._cond_pos(c, _TNOW, taken) for c in self.prob.goal]
        out = []
        if lits:
            out.append(_wrap(f"goal({_TNOW}) :- {', '.join(lits)}."))
        else:
            out.append(f"goal({_TNOW}).")
        out.append(f":- query(t), not goal({_TNOW}).")
        return out

    # ------------------------------------------------------------------
    # parts

    def base_part(self) -> str:
        sections = [
            ("objects", self._sort_facts()),
            ("fluent values", self._dom_facts()),
            ("initial knowledge", self._init_facts()),
            ("knowledge propagation", self._propagation(_TMIN)),
            ("initial defaults", self._defaults()),
            ("candidate first actions", self._choices(_TMIN)),
        ]
        return self._render("#program base.", sections)

    def step_part(self) -> str:
        sections = [
            ("inertia", self._inertia()),
            ("knowledge propagation", self._propagation(_TNOW)),
            ("candidate actions", self._choices(_TNOW)),
            ("action effects", self._effects()),
            ("sensing outcomes", self._outcomes()),
        ]
        return self._render("#program step(t).", sections)

    def check_part(self) -> str:
        cost = (
            [f":~ sensAction({_TNOW}). [2@2,t]"] if self.dom.sensings else []
        )
        sections = [
            ("state consistency", self._consistency()),
            ("preconditions", self._preconditions()),
            ("sensing preconditions", self._sense_preconditions()),
            ("feasibility", self._feasibility()),
            ("concurrency", self._concurrency()),
            ("goal", self._goal()),
            ("sensing cost", cost),
        ]
        return self._render("#program check(t).", sections, ["#external query(t)."])

    def _render(self, header, sections, prelude=None) -> str:
        chunks = [header]
        if prelude:
            chunks.append("\n".join(prelude))
        for title, rules in sections:
            if rules:
                chunks.append(f"% {title}\n" + "\n".join(rules))
        return "\n\n".join(chunks) + "\n"


def emit(
    domain: DomainSpec,
    problem: ProblemSpec,
    step_limit: int = DEFAULT_STEP_LIMIT,
) -> EncodedProgram:
    """Encode a domain and problem as an incremental logic program."""
    em = _Emitter(domain, problem)
    base = em.base_part()
    step = em.step_part()
    check = em.check_part()
    preamble = (
        "#include <incmode>.\n\n"
        f"#const step_limit={step_limit}.\n"
        "#const time_min=0.\n"
    )
    combined = "\n".join([preamble, base, step, check])
    return EncodedProgram(
        base=base,
        step=step,
        check=check,
        combined=combined,
        occurrences=tuple(a.name for a in domain.actions),
    )


# ----------------------------------------------------------------------
# external solver bridge

SOLVER_ENV = "CONDPLAN_SOLVER"

_BANNERS = (
    "SATISFIABLE",
    "UNSATISFIABLE",
    "UNKNOWN",
    "OPTIMUM FOUND",
)
_SKIP_PREFIXES = (
    "Answer",
    "Optimization",
    "Solving",
    "Reading",
    "Calls",
    "Time",
    "CPU",
    "Models",
    "clingo",
    "%",
)

_NAME_RE = re.compile(r"[a-z_][A-Za-z0-9_]*\Z")


def _split_args(body: str) -> list[str]:
    out = []
    depth = 0
    cur = []
    for ch in body:
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced parentheses")
        cur.append(ch)
    if depth:
        raise ValueError("unbalanced parentheses")
    out.append("".join(cur))
    return out


def _parse_atom(token: str) -> tuple[str, tuple[str, ...]]:
    tok = token[1:] if token.startswith("-") else token
    if "(" not in tok:
        if not _NAME_RE.match(tok):
            raise ValueError(f"not an atom: {token!r}")
        return tok, ()
    if not tok.endswith(")"):
        raise ValueError(f"not an atom: {token!r}")
    name, _, body = tok.partition("(")
    if not _NAME_RE.match(name):
        raise ValueError(f"not an atom: {token!r}")
    return name, tuple(_split_args(body[:-1]))


def run_external(
    program: EncodedProgram,
    solver_path: Optional[str] = None,
    max_steps: int = DEFAULT_STEP_LIMIT,
    timeout: Optional[float] = None,
) -> list[SolvedAction]:
    """Solve the program with an external binary and collect occurrences.

    The program text goes to the solver on standard input; the solver is
    expected to print one answer set on standard output with atoms
    separated by whitespace.  Occurrence atoms -- actuation actions and
    ``sense(...)`` records -- come back sorted by time step.
    """
    path = solver_path or os.environ.get(SOLVER_ENV)
    if not path:
        raise SolverUnavailable(
            f"no solver configured; set {SOLVER_ENV} or pass solver_path"
        )
    text = re.sub(
        r"#const step_limit=\d+\.",
        f"#const step_limit={max_steps}.",
        program.combined,
        count=1,
    )
    try:
        proc = subprocess.run(
            [path],
            input=text,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except FileNotFoundError as exc:
        raise SolverUnavailable(f"solver binary not found: {path}") from exc
    except PermissionError as exc:
        raise SolverUnavailable(f"solver binary not runnable: {path}") from exc

    wanted = set(program.occurrences)
    found: set[SolvedAction] = set()
    saw_unsat = False
    for line in proc.stdout.splitlines():
        stripped = line.strip()
        if not stripped or stripped in _BANNERS:
            saw_unsat = saw_unsat or stripped == "UNSATISFIABLE"
            continue
        if any(stripped.startswith(p) for p in _SKIP_PREFIXES):
            continue
        for token in stripped.split():
            try:
                name, args = _parse_atom(token)
            except ValueError as exc:
                raise SolverOutputError(
                    f"malformed solver output: {line!r}"
                ) from exc
            if name not in wanted and name != "sense":
                continue
            if not args or not re.fullmatch(r"-?\d+", args[-1]):
                raise SolverOutputError(
                    f"occurrence atom without a time step: {line!r}"
                )
            found.add(SolvedAction(name, args[:-1], int(args[-1])))
    if not found and (saw_unsat or proc.returncode == 20):
        raise Unsatisfiable("no plan within the step limit")
    return sorted(found, key=lambda r: (r.time, r.name, r.args))
