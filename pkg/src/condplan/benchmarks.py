"""Benchmark instance generators and the kitchen fixture.

Three generated families plus one checked-in fixture:

* bts(m): m packages, exactly one holds a bomb; probe then dunk.
* colorball(n, x): an agent in an n x n grid locates, identifies and
  disposes x balls of unknown position and color.  Presence can only be
  sensed from the ball's cell, so location is learned by elimination.
* doors(n): an n x n grid with walls on odd columns; each wall has one
  open door at an unknown row, detectable only from the adjacent cell.
  Free movement inside a corridor runs through a grid feasibility guard.
* kitchen-lite: a small service-robot domain stored under fixtures/.

All generators are deterministic: the same parameters produce byte
identical text.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .feasibility import cell_name, make_grid_path


@dataclass(frozen=True)
class BenchmarkSpec:
    family: str  # bts | colorball | doors | kitchen-lite
    m: Optional[int] = None
    n: Optional[int] = None
    balls: Optional[int] = None


def generate(spec: BenchmarkSpec) -> str:
    if spec.family == "bts":
        if spec.m is None:
            raise ValueError("bts needs m")
        return gen_bts(spec.m)
    if spec.family == "colorball":
        if spec.n is None or spec.balls is None:
            raise ValueError("colorball needs n and balls")
        return gen_colorball(spec.n, spec.balls)
    if spec.family == "doors":
        if spec.n is None:
            raise ValueError("doors needs n")
        return gen_doors(spec.n)
    if spec.family == "kitchen-lite":
        return kitchen_lite_text()
    raise ValueError(f"unknown benchmark family '{spec.family}'")


def gen_bts(m: int) -> str:
    """Bomb in the toilet: exactly one of m packages is armed."""
    if m < 1:
        raise ValueError("m must be >= 1")
    width = len(str(m))
    pkgs = [f"p{str(i).zfill(width)}" for i in range(1, m + 1)]
    out = [
        f"# bomb in the toilet, {m} packages, exactly one bomb",
        f"sort pkg = {{ {', '.join(pkgs)} }}",
        "fluent has_bomb(pkg) : { true, false } partial",
        "fluent armed : { true, false } full",
        "constraint exactly 1 { has_bomb(P)=true : P in pkg }",
        "action dunk(P: pkg)",
        "  pre has_bomb(P) = true",
        "  eff armed := false",
        "sense probe(P: pkg) -> has_bomb(P)",
        "init armed = true",
        "goal armed = false",
    ]
    return "\n".join(out) + "\n"


def _grid_cells(n: int) -> list[str]:
    return [cell_name(x, y) for x in range(n) for y in range(n)]


def _adjacent_pairs(n: int, columns: Optional[set[int]] = None) -> list[tuple[str, str]]:
    pairs = []
    for x in range(n):
        if columns is not None and x not in columns:
            continue
        for y in range(n):
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nx, ny = x + dx, y + dy
                if 0 <= nx < n and 0 <= ny < n:
                    if columns is not None and nx not in columns:
                        continue
                    pairs.append((cell_name(x, y), cell_name(nx, ny)))
    return sorted(set(pairs))


def gen_colorball(n: int, x: int) -> str:
    """Color-ball disposal in an n x n grid with x balls.

    Ball presence is a per-cell boolean sensed from that cell; an
    exactly-one constraint per ball turns the last un-excluded cell into
    known presence.  Color sensing needs the agent at the ball's cell.
    Disposal bins sit in fixed corners, one per color.
    """
    if n < 1 or x < 1:
        raise ValueError("sizes must be >= 1")
    # balls may share a cell, so x > n*n is a legal (degenerate) instance
    balls = [f"b{i}" for i in range(1, x + 1)]
    cells = _grid_cells(n)
    bins = {
        "red": cell_name(0, 0),
        "green": cell_name(0, n - 1),
        "blue": cell_name(n - 1, 0),
    }
    out = [
        f"# color-ball disposal, {n}x{n} grid, {x} ball(s)",
        f"sort ball = {{ {', '.join(balls)} }}",
        f"sort cell = {{ {', '.join(cells)} }}",
        f"fluent at_robot : {{ {', '.join(cells)} }} full",
        "fluent ball_at(ball, cell) : { true, false } partial",
        "fluent color(ball) : { red, green, blue } partial",
        "fluent trashed(ball) : { true, false } full",
        f"fluent holding : {{ none, {', '.join(balls)} }} full",
    ]
    for b in balls:
        # one true cell per ball; sensing the rest false promotes the last
        out.append(f"constraint exactly 1 {{ ball_at({b},C)=true : C in cell }}")
    for f, t in _adjacent_pairs(n):
        out += [
            f"action move_{f}_{t}",
            f"  pre at_robot = {f}",
            f"  eff at_robot := {t}",
        ]
    out += [
        "action pickup(B: ball, C: cell)",
        "  pre at_robot = C",
        "  pre ball_at(B, C) = true",
        "  pre trashed(B) = false",
        "  pre holding = none",
        "  eff holding := B",
    ]
    for col, bin_cell in bins.items():
        out += [
            f"action dispose_{col}(B: ball)",
            f"  pre at_robot = {bin_cell}",
            "  pre holding = B",
            f"  pre color(B) = {col}",
            "  eff holding := none",
            "  eff trashed(B) := true",
        ]
    out += [
        "sense look(B: ball, C: cell) -> ball_at(B, C)",
        "  pre at_robot = C",
        "sense check_color(B: ball, C: cell) -> color(B)",
        "  pre at_robot = C",
        "  pre ball_at(B, C) = true",
    ]
    for b in balls:
        # once disposed, where the ball was and its color stop mattering
        out.append(f"redundant color({b}) if trashed({b}) = true")
        out.append(f"redundant ball_at({b}, C) if trashed({b}) = true")
    out.append(f"init at_robot = {cell_name(0, 0)}")
    out.append("init holding = none")
    for b in balls:
        out.append(f"init trashed({b}) = false")
    for b in balls:
        out.append(f"goal trashed({b}) = true")
    return "\n".join(out) + "\n"


def doors_wall_columns(n: int) -> list[int]:
    return list(range(1, n - 1, 2))


def doors_obstacles(n: int) -> list[str]:
    """Wall cells for the doors grid; doors themselves are not modeled
    as free space, crossing is a separate action."""
    return [
        cell_name(x, y) for x in doors_wall_columns(n) for y in range(n)
    ]


def doors_evaluator(n: int):
    """Feasibility evaluator for the move guard of gen_doors(n)."""
    return make_grid_path(n, n, doors_obstacles(n))


def gen_doors(n: int) -> str:
    """Hidden-doors traversal in an n x n grid (odd n).

    Odd columns are walls with exactly one open door each at an unknown
    row.  The door state of a row is sensed from the cell west of it;
    moving inside a corridor is one step guarded by grid reachability.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError("n must be odd and >= 3")
    walls = doors_wall_columns(n)
    free = [cell_name(x, y) for x in range(n) if x not in walls for y in range(n)]
    rows = [f"r{y}" for y in range(n)]
    out = [
        f"# hidden doors, {n}x{n} grid, walls on columns {', '.join(str(w) for w in walls)}",
        f"sort cell = {{ {', '.join(free)} }}",
        f"sort row = {{ {', '.join(rows)} }}",
        f"fluent at_robot : {{ {', '.join(free)} }} full",
    ]
    for w in walls:
        out.append(f"fluent open_w{w}(row) : {{ true, false }} partial")
    for w in walls:
        out.append(
            f"constraint exactly 1 {{ open_w{w}(R)=true : R in row }}"
        )
    out += [
        "action move(F: cell, T: cell)",
        "  pre at_robot = F",
        "  pre at_robot != T",
        "  eff at_robot := T",
        "feasible-guard move(F, T) uses reach(F, T)",
    ]
    for w in walls:
        for y in range(n):
            west = cell_name(w - 1, y)
            east = cell_name(w + 1, y)
            out += [
                f"action cross_w{w}_r{y}",
                f"  pre at_robot = {west}",
                f"  pre open_w{w}(r{y}) = true",
                f"  eff at_robot := {east}",
            ]
    for w in walls:
        for y in range(n):
            west = cell_name(w - 1, y)
            out += [
                f"sense spot_w{w}_r{y} -> open_w{w}(r{y})",
                f"  pre at_robot = {west}",
            ]
    out.append(f"init at_robot = {cell_name(0, 0)}")
    out.append(f"goal at_robot = {cell_name(n - 1, n - 1)}")
    return "\n".join(out) + "\n"


def kitchen_lite_text() -> str:
    return (
        resources.files("condplan") / "fixtures" / "kitchen_lite.hcp"
    ).read_text()


def kitchen_lite_path() -> str:
    return str(resources.files("condplan") / "fixtures" / "kitchen_lite.hcp")


def kitchen_routes_path() -> str:
    """Path of the all-routes-open lookup table shipped with the fixture."""
    return str(resources.files("condplan") / "fixtures" / "kitchen_routes.lookup")
