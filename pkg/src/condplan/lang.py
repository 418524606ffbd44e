"""Line-oriented surface syntax for domains and problems.

Statements are dispatched on a leading keyword; ``pre``, ``eff`` and
``mutex`` lines attach to the most recently opened action or sensing
declaration.  ``#`` starts a comment.  Identifiers beginning with an
upper-case letter are variables, everything else is a constant.

    sort pkg = { p1, p2 }
    fluent has_bomb(pkg) : { true, false } partial
    fluent armed : { true, false } full
    constraint exactly 1 { has_bomb(P)=true : P in pkg }
    action dunk(P: pkg)
      pre has_bomb(P) = true
      eff armed := false
    sense probe(P: pkg) -> has_bomb(P)
    feasible-guard move(F,T) uses path_exists(F,T)
    redundant color(B) if trashed(B) = true
    default at_obj(O) != table
    option concurrency off
    init armed = true
    goal armed = false

Domain and problem statements may share one file or be split across two;
a later file is parsed in the context of the earlier one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .belief import InconsistentBelief, initial_belief
from .model import (
    EQ,
    NEQ,
    KNOWN,
    UNKNOWN,
    ASSIGN,
    EXCLUDE,
    ActionSchema,
    ConstraintDecl,
    DefaultDecl,
    DomainSpec,
    FluentDecl,
    GroundingError,
    GuardDecl,
    InitFact,
    Pattern,
    ProblemSpec,
    RedundancyDecl,
    SchemaCond,
    SchemaEff,
    SensingSchema,
    SourceSpan,
    ground,
    is_var,
)

_TOKEN_RE = re.compile(
    r"feasible-guard|:=|-=|!=|->|[{}(),:=]|[A-Za-z_][A-Za-z0-9_]*|\d+"
)

_KEYWORDS = {
    "sort",
    "fluent",
    "constraint",
    "action",
    "sense",
    "pre",
    "eff",
    "mutex",
    "redundant",
    "feasible-guard",
    "default",
    "init",
    "goal",
    "option",
}


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str
    span: SourceSpan

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.diagnostic = Diagnostic("error", message, span)
        self.span = span


@dataclass
class ParsedUnit:
    domain: DomainSpec
    problem: ProblemSpec
    warnings: list[Diagnostic] = field(default_factory=list)


class _Line:
    """Token cursor over one source line."""

    def __init__(self, text: str, file: str, lineno: int):
        self.file = file
        self.lineno = lineno
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        body = text.split("#", 1)[0]
        while pos < len(body):
            if body[pos].isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(body, pos)
            if not m:
                raise ParseError(
                    f"unexpected character {body[pos]!r}",
                    SourceSpan(file, lineno, pos + 1),
                )
            self.tokens.append((m.group(0), pos + 1))
            pos = m.end()
        self.i = 0

    def span(self) -> SourceSpan:
        col = self.tokens[self.i][1] if self.i < len(self.tokens) else (
            self.tokens[-1][1] if self.tokens else 1
        )
        return SourceSpan(self.file, self.lineno, col)

    def peek(self) -> Optional[str]:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def next(self, what: str = "token") -> str:
        if self.i >= len(self.tokens):
            raise ParseError(f"expected {what} at end of line", self.span())
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, literal: str) -> None:
        span = self.span()
        tok = self.next(repr(literal))
        if tok != literal:
            raise ParseError(f"expected {literal!r}, got {tok!r}", span)

    def ident(self, what: str = "identifier") -> str:
        span = self.span()
        tok = self.next(what)
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*|\d+", tok):
            raise ParseError(f"expected {what}, got {tok!r}", span)
        return tok

    def int_(self) -> int:
        span = self.span()
        tok = self.next("integer")
        if not tok.isdigit():
            raise ParseError(f"expected integer, got {tok!r}", span)
        return int(tok)

    def done(self) -> None:
        if self.i < len(self.tokens):
            raise ParseError(
                f"unexpected trailing {self.tokens[self.i][0]!r}", self.span()
            )


def _parse_pattern(ln: _Line) -> Pattern:
    name = ln.ident("fluent name")
    args: list[str] = []
    if ln.peek() == "(":
        ln.expect("(")
        while True:
            args.append(ln.ident("argument"))
            if ln.peek() == ",":
                ln.expect(",")
                continue
            break
        ln.expect(")")
    return Pattern(name, tuple(args))


def _parse_cond(ln: _Line) -> SchemaCond:
    span = ln.span()
    if ln.peek() in ("known", "unknown"):
        kind = KNOWN if ln.next() == "known" else UNKNOWN
        return SchemaCond(kind, pattern=_parse_pattern(ln), span=span)
    pat = _parse_pattern(ln)
    op_span = ln.span()
    op = ln.next("'=' or '!='")
    if op not in ("=", "!="):
        raise ParseError(f"expected '=' or '!=', got {op!r}", op_span)
    value = ln.ident("value")
    return SchemaCond(EQ if op == "=" else NEQ, pattern=pat, value=value, span=span)


class _Builder:
    def __init__(self) -> None:
        self.sorts: dict[str, tuple[str, ...]] = {}
        self.fluents: dict[str, FluentDecl] = {}
        self.actions: list[dict] = []
        self.sensings: list[dict] = []
        self.constraints: list[ConstraintDecl] = []
        self.redundancies: list[RedundancyDecl] = []
        self.guards: list[GuardDecl] = []
        self.defaults: list[DefaultDecl] = []
        self.init: list[InitFact] = []
        self.goal: list[SchemaCond] = []
        self.concurrency = False
        self.open: Optional[dict] = None  # action/sense collecting pre/eff
        self.warnings: list[Diagnostic] = []

    @classmethod
    def from_unit(cls, unit: ParsedUnit) -> "_Builder":
        b = cls()
        d = unit.domain
        b.sorts = dict(d.sorts)
        b.fluents = dict(d.fluents)
        b.actions = [
            {
                "name": a.name,
                "params": a.params,
                "pre": list(a.pre),
                "eff": list(a.eff),
                "mutex": list(a.mutex),
                "span": a.span,
                "kind": "action",
            }
            for a in d.actions
        ]
        b.sensings = [
            {
                "name": s.name,
                "params": s.params,
                "target": s.target,
                "pre": list(s.pre),
                "span": s.span,
                "kind": "sense",
            }
            for s in d.sensings
        ]
        b.constraints = list(d.constraints)
        b.redundancies = list(d.redundancies)
        b.guards = list(d.guards)
        b.defaults = list(d.defaults)
        b.init = list(unit.problem.init)
        b.goal = list(unit.problem.goal)
        b.concurrency = d.concurrency
        return b

    def finish(self) -> ParsedUnit:
        domain = DomainSpec(
            name="domain",
            sorts=self.sorts,
            fluents=self.fluents,
            actions=tuple(
                ActionSchema(
                    a["name"],
                    a["params"],
                    tuple(a["pre"]),
                    tuple(a["eff"]),
                    tuple(a["mutex"]),
                    span=a["span"],
                )
                for a in self.actions
            ),
            sensings=tuple(
                SensingSchema(
                    s["name"],
                    s["params"],
                    s["target"],
                    tuple(s["pre"]),
                    span=s["span"],
                )
                for s in self.sensings
            ),
            constraints=tuple(self.constraints),
            redundancies=tuple(self.redundancies),
            guards=tuple(self.guards),
            defaults=tuple(self.defaults),
            concurrency=self.concurrency,
        )
        problem = ProblemSpec(init=tuple(self.init), goal=tuple(self.goal))
        return ParsedUnit(domain, problem, self.warnings)


def parse(
    text: str, filename: str = "<input>", context: Optional[ParsedUnit] = None
) -> ParsedUnit:
    """Parse domain/problem text; raises ParseError at the first bad line.

    ``context`` supplies declarations from an earlier file so that a
    problem file can reference its domain.
    """
    b = _Builder.from_unit(context) if context is not None else _Builder()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        ln = _Line(raw, filename, lineno)
        if ln.peek() is None:
            continue
        head_span = ln.span()
        head = ln.next()
        if head not in _KEYWORDS:
            raise ParseError(f"unknown statement {head!r}", head_span)
        if head not in ("pre", "eff", "mutex"):
            if head not in ("action", "sense"):
                b.open = None
        getattr(_Statements, head.replace("-", "_"))(b, ln, head_span)
        ln.done()
    return b.finish()


class _Statements:
    @staticmethod
    def sort(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        name = ln.ident("sort name")
        if name in b.sorts:
            raise ParseError(f"sort '{name}' already declared", span)
        ln.expect("=")
        ln.expect("{")
        objs: list[str] = []
        while True:
            obj_span = ln.span()
            obj = ln.ident("object name")
            if is_var(obj):
                raise ParseError("object names must start lower-case", obj_span)
            if obj in objs:
                raise ParseError(f"duplicate object '{obj}'", obj_span)
            objs.append(obj)
            if ln.peek() == ",":
                ln.expect(",")
                continue
            break
        ln.expect("}")
        b.sorts[name] = tuple(objs)

    @staticmethod
    def fluent(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        name = ln.ident("fluent name")
        if name in b.fluents:
            raise ParseError(f"fluent '{name}' already declared", span)
        params: list[str] = []
        if ln.peek() == "(":
            ln.expect("(")
            while True:
                s_span = ln.span()
                s = ln.ident("sort name")
                if s not in b.sorts:
                    raise ParseError(f"unknown sort '{s}'", s_span)
                params.append(s)
                if ln.peek() == ",":
                    ln.expect(",")
                    continue
                break
            ln.expect(")")
        ln.expect(":")
        ln.expect("{")
        values: list[str] = []
        while True:
            v_span = ln.span()
            v = ln.ident("value")
            if is_var(v):
                raise ParseError("values must start lower-case", v_span)
            if v in values:
                raise ParseError(f"duplicate value '{v}'", v_span)
            values.append(v)
            if ln.peek() == ",":
                ln.expect(",")
                continue
            break
        ln.expect("}")
        obs_span = ln.span()
        obs = ln.next("'full' or 'partial'")
        if obs not in ("full", "partial"):
            raise ParseError(f"expected 'full' or 'partial', got {obs!r}", obs_span)
        b.fluents[name] = FluentDecl(name, tuple(params), tuple(values), obs, span)

    @staticmethod
    def constraint(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        bound_span = ln.span()
        bound = ln.next("'exactly', 'atleast' or 'atmost'")
        if bound not in ("exactly", "atleast", "atmost"):
            raise ParseError(
                f"expected 'exactly', 'atleast' or 'atmost', got {bound!r}",
                bound_span,
            )
        n = ln.int_()
        lower, upper = {
            "exactly": (n, n),
            "atleast": (n, None),
            "atmost": (0, n),
        }[bound]
        ln.expect("{")
        templates: list[tuple[Pattern, str]] = []
        while True:
            pat = _parse_pattern(ln)
            ln.expect("=")
            templates.append((pat, ln.ident("value")))
            if ln.peek() == ",":
                ln.expect(",")
                continue
            break
        gens: list[tuple[str, str]] = []
        if ln.peek() == ":":
            ln.expect(":")
            while True:
                v_span = ln.span()
                var = ln.ident("variable")
                if not is_var(var):
                    raise ParseError("generator variable must start upper-case", v_span)
                ln.expect("in")
                s_span = ln.span()
                s = ln.ident("sort name")
                if s not in b.sorts:
                    raise ParseError(f"unknown sort '{s}'", s_span)
                gens.append((var, s))
                if ln.peek() == ",":
                    ln.expect(",")
                    continue
                break
        ln.expect("}")
        b.constraints.append(
            ConstraintDecl(lower, upper, tuple(templates), tuple(gens), span)
        )

    @staticmethod
    def _params(b: _Builder, ln: _Line) -> tuple[tuple[str, str], ...]:
        params: list[tuple[str, str]] = []
        if ln.peek() == "(":
            ln.expect("(")
            while True:
                v_span = ln.span()
                var = ln.ident("parameter")
                if not is_var(var):
                    raise ParseError("parameters must start upper-case", v_span)
                if any(var == p for p, _ in params):
                    raise ParseError(f"duplicate parameter '{var}'", v_span)
                ln.expect(":")
                s_span = ln.span()
                s = ln.ident("sort name")
                if s not in b.sorts:
                    raise ParseError(f"unknown sort '{s}'", s_span)
                params.append((var, s))
                if ln.peek() == ",":
                    ln.expect(",")
                    continue
                break
            ln.expect(")")
        return tuple(params)

    @staticmethod
    def action(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        name = ln.ident("action name")
        if any(a["name"] == name for a in b.actions) or any(
            s["name"] == name for s in b.sensings
        ):
            raise ParseError(f"action or sensing '{name}' already declared", span)
        params = _Statements._params(b, ln)
        rec = {
            "name": name,
            "params": params,
            "pre": [],
            "eff": [],
            "mutex": [],
            "span": span,
            "kind": "action",
        }
        b.actions.append(rec)
        b.open = rec

    @staticmethod
    def sense(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        name = ln.ident("sensing name")
        if any(a["name"] == name for a in b.actions) or any(
            s["name"] == name for s in b.sensings
        ):
            raise ParseError(f"action or sensing '{name}' already declared", span)
        params = _Statements._params(b, ln)
        ln.expect("->")
        target = _parse_pattern(ln)
        rec = {
            "name": name,
            "params": params,
            "target": target,
            "pre": [],
            "span": span,
            "kind": "sense",
        }
        b.sensings.append(rec)
        b.open = rec

    @staticmethod
    def pre(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        if b.open is None:
            raise ParseError("'pre' outside action or sense block", span)
        b.open["pre"].append(_parse_cond(ln))

    @staticmethod
    def eff(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        if b.open is None or b.open["kind"] != "action":
            raise ParseError("'eff' outside action block", span)
        pat = _parse_pattern(ln)
        op_span = ln.span()
        op = ln.next("':=' or '-='")
        if op not in (":=", "-="):
            raise ParseError(f"expected ':=' or '-=', got {op!r}", op_span)
        value = ln.ident("value")
        b.open["eff"].append(
            SchemaEff(ASSIGN if op == ":=" else EXCLUDE, pat, value, span)
        )

    @staticmethod
    def mutex(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        if b.open is None or b.open["kind"] != "action":
            raise ParseError("'mutex' outside action block", span)
        b.open["mutex"].append(_parse_pattern(ln))

    @staticmethod
    def redundant(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        target = _parse_pattern(ln)
        ln.expect("if")
        guard = [_parse_cond(ln)]
        while ln.peek() == ",":
            ln.expect(",")
            guard.append(_parse_cond(ln))
        b.redundancies.append(RedundancyDecl(target, tuple(guard), span))

    @staticmethod
    def feasible_guard(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        action = ln.ident("action name")
        params: list[str] = []
        if ln.peek() == "(":
            ln.expect("(")
            while True:
                v_span = ln.span()
                v = ln.ident("parameter")
                if not is_var(v):
                    raise ParseError("guard parameters must start upper-case", v_span)
                params.append(v)
                if ln.peek() == ",":
                    ln.expect(",")
                    continue
                break
            ln.expect(")")
        ln.expect("uses")
        query = _parse_pattern(ln)
        b.guards.append(GuardDecl(action, tuple(params), query, span))

    @staticmethod
    def default(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        pat = _parse_pattern(ln)
        op_span = ln.span()
        op = ln.next("'=' or '!='")
        if op not in ("=", "!="):
            raise ParseError(f"expected '=' or '!=', got {op!r}", op_span)
        value = ln.ident("value")
        b.defaults.append(DefaultDecl(pat, op == "=", value, span))

    @staticmethod
    def init(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        pat = _parse_pattern(ln)
        for a in pat.args:
            if is_var(a):
                raise ParseError("init facts must be ground", span)
        op_span = ln.span()
        op = ln.next("'=' or '!='")
        if op not in ("=", "!="):
            raise ParseError(f"expected '=' or '!=', got {op!r}", op_span)
        v_span = ln.span()
        value = ln.ident("value")
        if is_var(value):
            raise ParseError("init facts must be ground", v_span)
        b.init.append(InitFact(pat, op == "=", value, span))

    @staticmethod
    def goal(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        cond = _parse_cond(ln)
        terms = list(cond.pattern.args if cond.pattern else ())
        if cond.value is not None:
            terms.append(cond.value)
        for t in terms:
            if is_var(t):
                raise ParseError("goal conditions must be ground", span)
        b.goal.append(cond)

    @staticmethod
    def option(b: _Builder, ln: _Line, span: SourceSpan) -> None:
        name_span = ln.span()
        name = ln.ident("option name")
        if name != "concurrency":
            raise ParseError(f"unknown option '{name}'", name_span)
        v_span = ln.span()
        v = ln.next("'on' or 'off'")
        if v not in ("on", "off"):
            raise ParseError(f"expected 'on' or 'off', got {v!r}", v_span)
        b.concurrency = v == "on"


# ---------------------------------------------------------------------------
# semantic validation


def validate(
    unit: ParsedUnit, feasibility_names: Optional[Sequence[str]] = None
) -> list[Diagnostic]:
    """Collect semantic problems that the line parser cannot see."""
    diags: list[Diagnostic] = list(unit.warnings)
    domain, problem = unit.domain, unit.problem

    def err(message: str, span: SourceSpan) -> None:
        diags.append(Diagnostic("error", message, span))

    try:
        model = ground(domain)
    except GroundingError as e:
        sp = getattr(e, "span", SourceSpan("<domain>", 0, 0))
        diags.append(Diagnostic("error", str(e), sp))
        return diags

    for s in model.sensings:
        if len(s.target.decl.domain) < 2:
            err(
                f"sensing '{s.name}' targets {s.target.decl.name}, "
                "whose domain has fewer than 2 values",
                s.target.decl.span,
            )

    if feasibility_names is not None:
        known = set(feasibility_names)
        for g in domain.guards:
            if g.query.name not in known:
                err(f"no feasibility evaluator named '{g.query.name}'", g.span)
    declared = {a.name for a in domain.actions} | {s.name for s in domain.sensings}
    for g in domain.guards:
        if g.action not in declared:
            err(f"guard names unknown action '{g.action}'", g.span)

    for fact in problem.init:
        key = (fact.pattern.name, fact.pattern.args)
        if key not in model.index_of:
            err(f"unknown fluent instance {fact.pattern}", fact.span)
            continue
        inst = model.instances[model.index_of[key]]
        if fact.value not in inst.decl.domain:
            err(
                f"value '{fact.value}' not in domain of {inst.name}",
                fact.span,
            )
        if not fact.positive and inst.decl.fully_observable:
            err(
                f"exclusion on fully observable fluent {inst.name}",
                fact.span,
            )

    for cond in problem.goal:
        if cond.pattern is None:
            continue
        key = (cond.pattern.name, cond.pattern.args)
        if key not in model.index_of:
            err(f"unknown fluent instance {cond.pattern}", cond.span)
        elif cond.value is not None:
            inst = model.instances[model.index_of[key]]
            if cond.value not in inst.decl.domain:
                err(f"value '{cond.value}' not in domain of {inst.name}", cond.span)

    if not problem.goal:
        diags.append(
            Diagnostic("warning", "empty goal; any state is accepting",
                       SourceSpan("<problem>", 0, 0))
        )

    if not any(d.severity == "error" for d in diags):
        try:
            initial_belief(model, problem)
        except InconsistentBelief as e:
            diags.append(
                Diagnostic("error", f"inconsistent initial state: {e}",
                           SourceSpan("<problem>", 0, 0))
            )
    return diags


# ---------------------------------------------------------------------------
# pretty printer


def _fmt_cond(c: SchemaCond) -> str:
    if c.kind == KNOWN:
        return f"known {c.pattern}"
    if c.kind == UNKNOWN:
        return f"unknown {c.pattern}"
    op = "=" if c.kind == EQ else "!="
    return f"{c.pattern} {op} {c.value}"


def print_unit(unit: ParsedUnit) -> str:
    """Render a unit back to canonical surface text (round-trips)."""
    d, p = unit.domain, unit.problem
    out: list[str] = []
    for name, objs in d.sorts.items():
        out.append(f"sort {name} = {{ {', '.join(objs)} }}")
    for f in d.fluents.values():
        head = f.name if not f.params else f"{f.name}({', '.join(f.params)})"
        out.append(
            f"fluent {head} : {{ {', '.join(f.domain)} }} {f.observability}"
        )
    for c in d.constraints:
        if c.upper is not None and c.lower == c.upper:
            bound = f"exactly {c.lower}"
        elif c.upper is None:
            bound = f"atleast {c.lower}"
        else:
            bound = f"atmost {c.upper}"
        lits = ", ".join(f"{pat}={v}" for pat, v in c.templates)
        gens = ", ".join(f"{v} in {s}" for v, s in c.gens)
        body = f"{lits} : {gens}" if gens else lits
        out.append(f"constraint {bound} {{ {body} }}")
    for a in d.actions:
        head = a.name
        if a.params:
            head += "(" + ", ".join(f"{v}: {s}" for v, s in a.params) + ")"
        out.append(f"action {head}")
        for c in a.pre:
            out.append(f"  pre {_fmt_cond(c)}")
        for e in a.eff:
            op = ":=" if e.kind == ASSIGN else "-="
            out.append(f"  eff {e.pattern} {op} {e.value}")
        for m in a.mutex:
            out.append(f"  mutex {m}")
    for s in d.sensings:
        head = s.name
        if s.params:
            head += "(" + ", ".join(f"{v}: {so}" for v, so in s.params) + ")"
        out.append(f"sense {head} -> {s.target}")
        for c in s.pre:
            out.append(f"  pre {_fmt_cond(c)}")
    for r in d.redundancies:
        guard = ", ".join(_fmt_cond(c) for c in r.guard)
        out.append(f"redundant {r.target} if {guard}")
    for g in d.guards:
        head = g.action
        if g.params:
            head += "(" + ",".join(g.params) + ")"
        out.append(f"feasible-guard {head} uses {g.query}")
    for df in d.defaults:
        op = "=" if df.positive else "!="
        out.append(f"default {df.pattern} {op} {df.value}")
    out.append(f"option concurrency {'on' if d.concurrency else 'off'}")
    for fact in p.init:
        op = "=" if fact.positive else "!="
        out.append(f"init {fact.pattern} {op} {fact.value}")
    for cond in p.goal:
        out.append(f"goal {_fmt_cond(cond)}")
    return "\n".join(out) + "\n"


def load_files(paths: Sequence[str]) -> ParsedUnit:
    """Parse one or more files, each in the context of its predecessors."""
    unit: Optional[ParsedUnit] = None
    for path in paths:
        with open(path, "r") as fh:
            text = fh.read()
        unit = parse(text, filename=str(path), context=unit)
    if unit is None:
        raise ValueError("no input files")
    return unit
