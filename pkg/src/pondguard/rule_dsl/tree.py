"""Compile a first-match rule program into an equivalent decision tree.

Compilation is symbolic: each node carries the set of percept pieces still
possible, rules are evaluated three-valued over that set, and the first
undecided atom of the first undecided rule becomes the next split.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .analysis import require_valid
from .ast import (
    Action,
    Always,
    And,
    Atom,
    Compare,
    Condition,
    Facts,
    Not,
    Or,
    RuleSet,
    walk,
)
from .cells import CellSpace, partition_percepts


@dataclass(frozen=True)
class Leaf:
    action: Action
    rule_id: str


@dataclass(frozen=True)
class BoolTest:
    field: str
    if_false: "Node"
    if_true: "Node"


@dataclass(frozen=True)
class Split:
    """Numeric test: high branch iff ``x > threshold`` (or ``==`` when inclusive_high)."""

    field: str
    threshold: float
    inclusive_high: bool
    low: "Node"
    high: "Node"

    def goes_high(self, x: float) -> bool:
        return x > self.threshold or (self.inclusive_high and x == self.threshold)


Node = Union[Leaf, BoolTest, Split]


@dataclass(frozen=True)
class DecisionTree:
    root: Node

    def decide(self, facts: Facts) -> Leaf:
        node = self.root
        while not isinstance(node, Leaf):
            if isinstance(node, BoolTest):
                node = node.if_true if facts[node.field] else node.if_false
            else:
                node = node.high if node.goes_high(facts[node.field]) else node.low
        return node

    def __call__(self, facts: Facts) -> Action:
        return self.decide(facts).action

    def paths(self):
        """Yield each root-to-leaf path as a list of tests."""
        stack: list[tuple[Node, tuple]] = [(self.root, ())]
        while stack:
            node, path = stack.pop()
            if isinstance(node, Leaf):
                yield list(path), node
            elif isinstance(node, BoolTest):
                stack.append((node.if_false, path + ((node.field, None, None),)))
                stack.append((node.if_true, path + ((node.field, None, None),)))
            else:
                key = (node.field, node.threshold, node.inclusive_high)
                stack.append((node.low, path + (key,)))
                stack.append((node.high, path + (key,)))

    def size(self) -> int:
        return sum(1 for _ in self.paths())


# Constraint: numeric field -> (lo, hi) inclusive piece-index range,
# boolean field -> None (unknown) or a fixed value.
Constraint = dict


def _eval3(cond: Condition, space: CellSpace, k: Constraint) -> bool | None:
    if isinstance(cond, Always):
        return True
    if isinstance(cond, Atom):
        return k[cond.field]
    if isinstance(cond, Compare):
        lo, hi = k[cond.field]
        pieces = space.axis(cond.field).pieces[lo : hi + 1]
        results = {cond.test(p.representative) for p in pieces}
        return results.pop() if len(results) == 1 else None
    if isinstance(cond, Not):
        v = _eval3(cond.item, space, k)
        return None if v is None else not v
    if isinstance(cond, And):
        vals = [_eval3(c, space, k) for c in cond.items]
        if False in vals:
            return False
        return True if all(v is True for v in vals) else None
    if isinstance(cond, Or):
        vals = [_eval3(c, space, k) for c in cond.items]
        if True in vals:
            return True
        return False if all(v is False for v in vals) else None
    raise TypeError(cond)


def _split_atom(cond: Condition, space: CellSpace, k: Constraint):
    for node in walk(cond):
        if isinstance(node, (Atom, Compare)) and _eval3(node, space, k) is None:
            return node
    raise AssertionError("undecided condition without an undecided atom")


def _build(rs: RuleSet, space: CellSpace, k: Constraint) -> Node:
    for rule in rs.rules:
        v = _eval3(rule.condition, space, k)
        if v is False:
            continue
        if v is True:
            return Leaf(rule.action, rule.id)
        atom = _split_atom(rule.condition, space, k)
        if isinstance(atom, Atom):
            return BoolTest(
                atom.field,
                _build(rs, space, {**k, atom.field: False}),
                _build(rs, space, {**k, atom.field: True}),
            )
        lo, hi = k[atom.field]
        pieces = space.axis(atom.field).pieces
        truth = [atom.test(pieces[i].representative) for i in range(lo, hi + 1)]
        # comparisons are monotone in x, so truth flips exactly once in range
        cut = lo + next(i for i in range(1, len(truth)) if truth[i] != truth[0])
        return Split(
            atom.field,
            atom.value,
            atom.op in ("<", ">="),
            _build(rs, space, {**k, atom.field: (lo, cut - 1)}),
            _build(rs, space, {**k, atom.field: (cut, hi)}),
        )
    raise AssertionError("no rule can fire; catch-all missing")


def compile_decision_tree(rs: RuleSet) -> DecisionTree:
    """Raises ValidationFailed when ``rs`` has ERROR diagnostics."""
    require_valid(rs)
    space = partition_percepts(rs)
    k: Constraint = {}
    for axis in space.axes:
        k[axis.field] = None if axis.is_boolean else (0, len(axis.pieces) - 1)
    return DecisionTree(_build(rs, space, k))
