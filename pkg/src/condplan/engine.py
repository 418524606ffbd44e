"""Assemble a conditional plan tree from parallel sequential-planning tasks.

Each task plans one branch: a sequential plan whose first step is pinned
to a sensing action with one designated outcome (the root task is
unconstrained).  Completed branches hang off their sensing node under an
outcome-labelled edge; every other outcome of each new sensing node
spawns a further task.  A shared hash table maps belief keys to finished
subtrees so equivalent beliefs reuse work: on a hit the rest of the
branch is replaced by the cached subtree and nothing is spawned beneath
it.

With deterministic mode on, task results are committed in task-creation
order, which makes every statistic independent of the worker count.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Union

from .belief import (
    BeliefState,
    equiv_key,
    goal_conditions,
    goal_holds,
    initial_belief,
    outcomes,
)
from .model import Condition, GroundModel, GroundSensing, ProblemSpec
from .seqplan import (
    DEFAULT_MAX_STEPS,
    Act,
    SearchMemo,
    Sense,
    SequentialPlan,
    TaskConstraint,
    find_plan,
)


class EngineError(Exception):
    pass


@dataclass
class EngineConfig:
    threads: int = 1
    max_steps: int = DEFAULT_MAX_STEPS
    minimize_sensing: bool = True
    equiv_classes: bool = True
    deterministic: bool = True


class ActNode:
    """One concurrent actuation step; child is None at branch leaves."""

    __slots__ = ("actions", "child", "id")

    def __init__(self, actions):
        self.actions = tuple(actions)
        self.child: Optional[PlanNode] = None
        self.id = -1

    @property
    def label(self) -> str:
        return "+".join(a.key for a in self.actions)


class SenseNode:
    """A sensing step with one outgoing edge per possible outcome."""

    __slots__ = ("sensing", "edges", "id")

    def __init__(self, sensing: GroundSensing):
        self.sensing = sensing
        self.edges: dict[str, PlanNode] = {}
        self.id = -1

    @property
    def label(self) -> str:
        return self.sensing.key

    def ordered_edges(self) -> list[tuple[str, "PlanNode"]]:
        order = {v: i for i, v in enumerate(self.sensing.target.decl.domain)}
        return sorted(self.edges.items(), key=lambda kv: order[kv[0]])


PlanNode = Union[ActNode, SenseNode]


@dataclass(frozen=True)
class PlanStats:
    tree_size: int
    dag_size: int
    max_depth: int
    sensing_nodes: int
    leaves: int

    def as_dict(self) -> dict:
        return {
            "tree_size": self.tree_size,
            "dag_size": self.dag_size,
            "max_depth": self.max_depth,
            "sensing_nodes": self.sensing_nodes,
            "leaves": self.leaves,
        }


@dataclass
class ConditionalPlan:
    """Rooted plan DAG; root None means the goal held initially."""

    model: GroundModel
    goal: tuple[Condition, ...]
    root: Optional[PlanNode]
    _stats: Optional[PlanStats] = field(default=None, repr=False)

    @property
    def empty(self) -> bool:
        return self.root is None

    @property
    def stats(self) -> PlanStats:
        if self._stats is None:
            self._stats = measure(self.root)
        return self._stats


@dataclass(frozen=True)
class Failure:
    """A branch task found no sequential plan; the build was aborted."""

    belief: BeliefState
    sensing: Optional[str]
    outcome: Optional[str]
    reason: str


@dataclass(frozen=True)
class RunReport:
    threads: int
    wallclock_s: float
    task_count: int
    cache_hits: int
    task_time_total_s: float

    @property
    def efficiency(self) -> float:
        if self.wallclock_s <= 0:
            return 0.0
        return self.task_time_total_s / (self.threads * self.wallclock_s)

    def as_dict(self) -> dict:
        return {
            "threads": self.threads,
            "wallclock_s": self.wallclock_s,
            "task_count": self.task_count,
            "cache_hits": self.cache_hits,
            "task_time_total_s": self.task_time_total_s,
            "efficiency": self.efficiency,
        }


@dataclass
class BuildResult:
    plan: Optional[ConditionalPlan]
    failure: Optional[Failure]
    report: RunReport

    @property
    def ok(self) -> bool:
        return self.failure is None


@dataclass
class _Task:
    index: int
    belief: BeliefState
    sensing: Optional[GroundSensing]
    outcome: Optional[str]
    parent: Optional[SenseNode]


def measure(root: Optional[PlanNode]) -> PlanStats:
    """Tree statistics with shared subtrees counted per occurrence.

    Arithmetic is memoized per node, so the DAG is walked once even when
    the unfolded tree is exponentially larger.  Raises EngineError on a
    cyclic graph (possible only with unsound redundancy rules).
    """
    if root is None:
        return PlanStats(0, 0, 0, 0, 0)
    # size, depth, senses, leaves per node
    memo: dict[int, tuple[int, int, int, int]] = {}
    open_ids: set[int] = set()
    stack: list[tuple[PlanNode, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in memo:
            continue
        kids = (
            [node.child] if isinstance(node, ActNode) and node.child is not None
            else [c for _, c in node.ordered_edges()] if isinstance(node, SenseNode)
            else []
        )
        if not expanded:
            if id(node) in open_ids:
                raise EngineError("plan graph contains a cycle")
            open_ids.add(id(node))
            stack.append((node, True))
            for k in kids:
                if id(k) not in memo:
                    if id(k) in open_ids:
                        raise EngineError("plan graph contains a cycle")
                    stack.append((k, False))
            continue
        open_ids.discard(id(node))
        if isinstance(node, ActNode):
            if node.child is None:
                memo[id(node)] = (1, 1, 0, 1)
            else:
                size, depth, senses, leaves = memo[id(node.child)]
                memo[id(node)] = (size + 1, depth + 1, senses, leaves)
        else:
            size, depth, senses, leaves = 1, 0, 1, 0
            for k in kids:
                s, d, sn, lv = memo[id(k)]
                size += s
                depth = max(depth, d)
                senses += sn
                leaves += lv
            memo[id(node)] = (size, depth + 1, senses, leaves)
    size, depth, senses, leaves = memo[id(root)]
    return PlanStats(size, len(memo), depth, senses, leaves)


def assign_ids(root: Optional[PlanNode]) -> list[PlanNode]:
    """Number nodes in depth-first preorder; returns them in id order."""
    nodes: list[PlanNode] = []
    if root is None:
        return nodes
    stack = [root]
    seen: set[int] = set()
    while stack:
        n = stack.pop()
        if id(n) in seen:
            continue
        seen.add(id(n))
        n.id = len(nodes)
        nodes.append(n)
        if isinstance(n, ActNode):
            if n.child is not None:
                stack.append(n.child)
        else:
            for _, child in reversed(n.ordered_edges()):
                stack.append(child)
    return nodes


class _Builder:
    def __init__(self, model: GroundModel, e0: BeliefState,
                 goal: tuple[Condition, ...], cfg: EngineConfig, feas):
        self.model = model
        self.e0 = e0
        self.goal = goal
        self.cfg = cfg
        self.feas = feas
        self.rules = model.redundancies if cfg.equiv_classes else ()
        # one shared memo: branch tasks overlap heavily in belief space
        self.memo = SearchMemo.for_start(model, e0, goal, feas)
        self.cond = threading.Condition()
        self.queue: deque[_Task] = deque()
        self.results: dict[int, tuple[_Task, Optional[tuple]]] = {}
        self.created = 0
        self.committed = 0
        self.next_commit = 0
        self.inflight = 0
        self.cancel = False
        self.done = False
        self.hashT: dict[str, PlanNode] = {}
        self.cache_hits = 0
        self.root: Optional[PlanNode] = None
        self.empty = False
        self.failure: Optional[Failure] = None
        self.task_time_total = 0.0

    def push(self, belief, sensing, outcome, parent) -> None:
        # caller holds the lock
        self.queue.append(_Task(self.created, belief, sensing, outcome, parent))
        self.created += 1
        self.cond.notify()

    def worker(self) -> None:
        while True:
            with self.cond:
                while not self.queue and not self.done and not self.cancel:
                    self.cond.wait()
                if self.done or self.cancel:
                    return
                task = self.queue.popleft()
                self.inflight += 1
            t0 = time.perf_counter()
            constraint = (
                None
                if task.sensing is None
                else TaskConstraint(task.sensing, task.outcome)
            )
            result = find_plan(
                self.model,
                task.belief,
                self.goal,
                constraint,
                max_steps=self.cfg.max_steps,
                minimize_sensing=self.cfg.minimize_sensing,
                feas=self.feas,
                memo=self.memo,
            )
            dt = time.perf_counter() - t0
            with self.cond:
                self.task_time_total += dt
                self.inflight -= 1
                self.results[task.index] = (task, result)
                if self.cfg.deterministic:
                    while self.next_commit in self.results and not self.cancel:
                        t, r = self.results.pop(self.next_commit)
                        self.next_commit += 1
                        self.commit(t, r)
                else:
                    t, r = self.results.pop(task.index)
                    self.commit(t, r)
                if self.cancel or (
                    self.committed == self.created
                    and not self.queue
                    and self.inflight == 0
                ):
                    self.done = True
                    self.cond.notify_all()

    def commit(self, task: _Task, result: Optional[tuple]) -> None:
        # caller holds the lock
        self.committed += 1
        if result is None:
            self.failure = Failure(
                task.belief,
                task.sensing.key if task.sensing else None,
                task.outcome,
                "no sequential plan within the step bound",
            )
            self.cancel = True
            self.queue.clear()
            return
        plan, history = result
        steps = plan.steps
        beliefs = history.beliefs
        if not steps:
            # only the root task may come back empty: goal held initially
            self.empty = True
            return
        created_here: set[int] = set()
        if task.parent is None:
            def link(node: PlanNode, _b=None) -> None:
                self.root = node
            start = 0
        else:
            parent, slot = task.parent, task.outcome

            def link(node: PlanNode, _parent=parent, _slot=slot) -> None:
                _parent.edges[_slot] = node
            start = 1
        for i in range(start, len(steps)):
            step = steps[i]
            b_i = beliefs[i]
            key = equiv_key(b_i, self.rules)
            hit = self.hashT.get(key)
            if hit is not None and id(hit) not in created_here:
                self.cache_hits += 1
                link(hit)
                return
            if isinstance(step, Act):
                node: PlanNode = ActNode(step.actions)
                link(node)
                link = _act_linker(node)
            else:
                node = SenseNode(step.sensing)
                link(node)
                for o in outcomes(b_i, step.sensing):
                    if o != step.outcome:
                        self.push(b_i, step.sensing, o, node)
                link = _edge_linker(node, step.outcome)
            created_here.add(id(node))
            if key not in self.hashT:
                self.hashT[key] = node


def _act_linker(node: ActNode):
    def link(child: PlanNode) -> None:
        node.child = child
    return link


def _edge_linker(node: SenseNode, outcome: str):
    def link(child: PlanNode) -> None:
        node.edges[outcome] = child
    return link


def build(
    model: GroundModel,
    problem: ProblemSpec,
    cfg: Optional[EngineConfig] = None,
    feas=None,
) -> BuildResult:
    """Construct a conditional plan covering every sensing outcome."""
    cfg = cfg or EngineConfig()
    if cfg.threads < 1:
        raise EngineError("threads must be >= 1")
    goal = tuple(goal_conditions(model, problem))
    e0 = initial_belief(model, problem)
    t_start = time.perf_counter()

    if goal_holds(e0, goal, feas):
        wall = time.perf_counter() - t_start
        plan = ConditionalPlan(model, goal, None)
        report = RunReport(cfg.threads, wall, 0, 0, 0.0)
        return BuildResult(plan, None, report)

    builder = _Builder(model, e0, goal, cfg, feas)
    with builder.cond:
        builder.push(e0, None, None, None)
    threads = [
        threading.Thread(target=builder.worker, name=f"plan-worker-{i}")
        for i in range(cfg.threads)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    wall = time.perf_counter() - t_start
    report = RunReport(
        cfg.threads,
        wall,
        builder.created,
        builder.cache_hits,
        builder.task_time_total,
    )
    if builder.failure is not None:
        return BuildResult(None, builder.failure, report)
    if builder.empty:
        return BuildResult(ConditionalPlan(model, goal, None), None, report)
    plan = ConditionalPlan(model, goal, builder.root)
    assign_ids(plan.root)
    return BuildResult(plan, None, report)


def stats(plan: ConditionalPlan) -> dict:
    return plan.stats.as_dict()
