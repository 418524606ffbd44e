from __future__ import annotations

import pytest

from condplan import (
    FeasibilityRegistry,
    ground,
    kitchen_lite_path,
    kitchen_routes_path,
    load_files,
    register_lookup,
)

# small two-package domain reused across suites; same shape as the
# bomb benchmark but kept inline so tests stay readable on their own
TWO_PKG = """\
sort pkg = { p1, p2 }
fluent has_bomb(pkg) : { true, false } partial
fluent armed : { true, false } full
constraint exactly 1 { has_bomb(P)=true : P in pkg }
action dunk(P: pkg)
  pre has_bomb(P) = true
  eff armed := false
sense probe(P: pkg) -> has_bomb(P)
init armed = true
goal armed = false
"""


@pytest.fixture(scope="session")
def kitchen_unit():
    return load_files([kitchen_lite_path()])


@pytest.fixture()
def kitchen_model(kitchen_unit):
    return ground(kitchen_unit.domain)


@pytest.fixture()
def kitchen_reg():
    reg = FeasibilityRegistry()
    register_lookup(reg, kitchen_routes_path())
    return reg
