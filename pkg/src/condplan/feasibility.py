"""Feasibility checks: pure external predicates with a memo cache.

Guards on actions compile to Feasible conditions whose queries are
answered here.  Evaluators are registered by predicate name and must be
pure functions of the query arguments; every distinct query is evaluated
at most once thanks to the insert-once cache.  A precompute pass can warm
the cache up front so that planning itself triggers no evaluator calls.
"""

from __future__ import annotations

import threading
from collections import deque
from pathlib import Path
from typing import Callable, Dict, Iterable, Tuple

from .model import FeasibilityQuery

Evaluator = Callable[[Tuple[str, ...]], bool]


class UnknownPredicate(Exception):
    """A query named an evaluator that was never registered."""


class LookupFormatError(Exception):
    """A lookup table file line could not be parsed."""


class FeasibilityRegistry:
    """Maps predicate names to evaluators and caches their verdicts."""

    def __init__(self) -> None:
        self._evaluators: Dict[str, Evaluator] = {}
        self._cache: Dict[FeasibilityQuery, bool] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        self.calls: Dict[str, int] = {}

    def register(self, name: str, evaluator: Evaluator) -> None:
        with self._lock:
            if name in self._evaluators:
                raise ValueError(f"evaluator '{name}' already registered")
            self._evaluators[name] = evaluator
            self.calls[name] = 0

    @property
    def names(self) -> frozenset[str]:
        with self._lock:
            return frozenset(self._evaluators)

    def check(self, query: FeasibilityQuery) -> bool:
        with self._lock:
            if query in self._cache:
                self.hits += 1
                return self._cache[query]
            self.misses += 1
            ev = self._evaluators.get(query.name)
            if ev is None:
                raise UnknownPredicate(f"no evaluator registered for '{query.name}'")
            verdict = bool(ev(query.args))
            self.calls[query.name] += 1
            self._cache[query] = verdict
            return verdict

    def precompute(self, queries: Iterable[FeasibilityQuery]) -> int:
        """Evaluate and cache every query; returns how many were new."""
        fresh = 0
        for q in queries:
            with self._lock:
                if q in self._cache:
                    continue
                ev = self._evaluators.get(q.name)
                if ev is None:
                    raise UnknownPredicate(f"no evaluator registered for '{q.name}'")
                self._cache[q] = bool(ev(q.args))
                self.calls[q.name] += 1
                fresh += 1
        return fresh

    def seed(self, verdicts: Dict[FeasibilityQuery, bool]) -> None:
        """Insert verdicts directly, bypassing evaluators (e.g. from a file)."""
        with self._lock:
            for q, v in verdicts.items():
                self._cache.setdefault(q, bool(v))

    @property
    def total_calls(self) -> int:
        with self._lock:
            return sum(self.calls.values())

    def counters(self) -> dict:
        with self._lock:
            return {
                "hits": self.hits,
                "misses": self.misses,
                "calls": dict(self.calls),
                "cached": len(self._cache),
            }

    def reset_counters(self) -> None:
        with self._lock:
            self.hits = 0
            self.misses = 0
            for k in self.calls:
                self.calls[k] = 0


# ---------------------------------------------------------------------------
# built-in evaluators


def always_true(args: Tuple[str, ...]) -> bool:
    return True


def load_lookup(path: str | Path) -> Dict[FeasibilityQuery, bool]:
    """Parse a lookup table file.

    Each non-comment line reads ``name arg1 ... argN -> true|false``;
    ``#`` starts a comment.
    """
    table: Dict[FeasibilityQuery, bool] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise LookupFormatError(f"{path}:{lineno}: missing '->'")
        left, right = line.rsplit("->", 1)
        verdict = right.strip()
        if verdict not in ("true", "false"):
            raise LookupFormatError(
                f"{path}:{lineno}: expected true or false, got {verdict!r}"
            )
        fields = left.split()
        if not fields:
            raise LookupFormatError(f"{path}:{lineno}: missing predicate name")
        q = FeasibilityQuery(fields[0], tuple(fields[1:]))
        table[q] = verdict == "true"
    return table


def make_table_lookup(
    table: Dict[FeasibilityQuery, bool], name: str
) -> Evaluator:
    """Evaluator answering from a loaded table; unlisted queries are false."""
    by_args = {q.args: v for q, v in table.items() if q.name == name}

    def evaluate(args: Tuple[str, ...]) -> bool:
        return by_args.get(args, False)

    return evaluate


def register_lookup(
    registry: FeasibilityRegistry, path: str | Path
) -> Dict[FeasibilityQuery, bool]:
    """Register one table-backed evaluator per predicate named in the file."""
    table = load_lookup(path)
    for name in sorted({q.name for q in table}):
        registry.register(name, make_table_lookup(table, name))
    return table


def cell_name(x: int, y: int) -> str:
    return f"c{x}_{y}"


def parse_cell(token: str) -> Tuple[int, int]:
    if not token.startswith("c") or "_" not in token:
        raise ValueError(f"bad cell name {token!r}")
    xs, ys = token[1:].split("_", 1)
    return int(xs), int(ys)


def make_grid_path(
    width: int, height: int, obstacles: Iterable[str] = ()
) -> Evaluator:
    """4-connected reachability between two cells of a width x height grid.

    Query args are two cell names like ``c2_0``; obstacle cells block both
    traversal and endpoints.
    """
    blocked = {parse_cell(c) for c in obstacles}

    def evaluate(args: Tuple[str, ...]) -> bool:
        if len(args) != 2:
            raise ValueError(f"grid_path expects 2 cells, got {args!r}")
        src, dst = parse_cell(args[0]), parse_cell(args[1])
        for x, y in (src, dst):
            if not (0 <= x < width and 0 <= y < height) or (x, y) in blocked:
                return False
        if src == dst:
            return True
        seen = {src}
        frontier = deque([src])
        while frontier:
            x, y = frontier.popleft()
            for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                if (
                    0 <= nx < width
                    and 0 <= ny < height
                    and (nx, ny) not in blocked
                    and (nx, ny) not in seen
                ):
                    if (nx, ny) == dst:
                        return True
                    seen.add((nx, ny))
                    frontier.append((nx, ny))
        return False

    return evaluate
