"""Serialization of conditional plans: Graphviz DOT and a JSON form.

The JSON form is lossless up to the ground model: labels are action and
sensing keys, so loading needs the same model the plan was built
against.  Node ids are depth-first preorder, which keeps diffs stable
across runs.
"""

from __future__ import annotations

import json
from typing import IO, Optional, Union

from .engine import (
    ActNode,
    ConditionalPlan,
    PlanNode,
    SenseNode,
    assign_ids,
    measure,
)
from .model import Condition, GroundModel


class PlanFormatError(ValueError):
    pass


def _nodes_in_id_order(plan: ConditionalPlan) -> list[PlanNode]:
    nodes = assign_ids(plan.root)
    return nodes


def to_json(plan: ConditionalPlan) -> dict:
    nodes = _nodes_in_id_order(plan)
    out_nodes = []
    for n in nodes:
        if isinstance(n, ActNode):
            children = [] if n.child is None else [{"id": n.child.id}]
            out_nodes.append(
                {"id": n.id, "kind": "act", "label": n.label, "children": children}
            )
        else:
            children = [
                {"outcome": o, "id": c.id} for o, c in n.ordered_edges()
            ]
            out_nodes.append(
                {"id": n.id, "kind": "sense", "label": n.label, "children": children}
            )
    return {
        "nodes": out_nodes,
        "root": plan.root.id if plan.root is not None else None,
        "stats": plan.stats.as_dict(),
    }


def dump_json(plan: ConditionalPlan, fh: IO[str]) -> None:
    json.dump(to_json(plan), fh, indent=2, sort_keys=False)
    fh.write("\n")


def from_json(
    data: Union[dict, str],
    model: GroundModel,
    goal: tuple[Condition, ...] = (),
) -> ConditionalPlan:
    """Rebuild a plan from its JSON form against a ground model.

    Stats in the file are ignored; they are recomputed from structure.
    """
    if isinstance(data, str):
        data = json.loads(data)
    if not isinstance(data, dict) or "nodes" not in data:
        raise PlanFormatError("not a plan document")
    raw = data["nodes"]
    if data.get("root") is None:
        if raw:
            raise PlanFormatError("null root with non-empty node list")
        return ConditionalPlan(model, goal, None)

    nodes: dict[int, PlanNode] = {}
    for rec in raw:
        nid = rec["id"]
        kind = rec["kind"]
        label = rec["label"]
        if kind == "act":
            actions = []
            for part in label.split("+"):
                a = model.action_by_key.get(part)
                if a is None:
                    raise PlanFormatError(f"unknown action '{part}'")
                actions.append(a)
            node: PlanNode = ActNode(actions)
        elif kind == "sense":
            s = model.sensing_by_key.get(label)
            if s is None:
                raise PlanFormatError(f"unknown sensing '{label}'")
            node = SenseNode(s)
        else:
            raise PlanFormatError(f"unknown node kind '{kind}'")
        node.id = nid
        if nid in nodes:
            raise PlanFormatError(f"duplicate node id {nid}")
        nodes[nid] = node

    for rec in raw:
        node = nodes[rec["id"]]
        children = rec.get("children", [])
        if isinstance(node, ActNode):
            if len(children) > 1:
                raise PlanFormatError("actuation node with more than one child")
            if children:
                node.child = _child(nodes, children[0])
        else:
            for c in children:
                if "outcome" not in c:
                    raise PlanFormatError("sensing edge without outcome label")
                o = c["outcome"]
                if o not in node.sensing.target.decl.domain:
                    raise PlanFormatError(
                        f"outcome '{o}' not in domain of {node.sensing.target}"
                    )
                if o in node.edges:
                    raise PlanFormatError(f"duplicate outcome edge '{o}'")
                node.edges[o] = _child(nodes, c)

    root_id = data["root"]
    if root_id not in nodes:
        raise PlanFormatError(f"root id {root_id} not among nodes")
    plan = ConditionalPlan(model, goal, nodes[root_id])
    plan._stats = measure(plan.root)
    return plan


def _child(nodes: dict[int, PlanNode], rec: dict) -> PlanNode:
    cid = rec["id"]
    if cid not in nodes:
        raise PlanFormatError(f"dangling child id {cid}")
    return nodes[cid]


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(plan: ConditionalPlan, title: Optional[str] = None) -> str:
    """Graphviz rendering: diamonds for sensing, boxes for actuation."""
    lines = ["digraph plan {"]
    if title:
        lines.append(f'  label="{_dot_escape(title)}";')
        lines.append("  labelloc=t;")
    lines.append('  node [fontname="Helvetica"];')
    nodes = _nodes_in_id_order(plan)
    if not nodes:
        lines.append('  empty [shape=plaintext, label="goal already satisfied"];')
        lines.append("}")
        return "\n".join(lines) + "\n"
    for n in nodes:
        shape = "box" if isinstance(n, ActNode) else "diamond"
        lines.append(f'  n{n.id} [shape={shape}, label="{_dot_escape(n.label)}"];')
    for n in nodes:
        if isinstance(n, ActNode):
            if n.child is not None:
                lines.append(f"  n{n.id} -> n{n.child.id};")
        else:
            for o, c in n.ordered_edges():
                lines.append(f'  n{n.id} -> n{c.id} [label="{_dot_escape(o)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
