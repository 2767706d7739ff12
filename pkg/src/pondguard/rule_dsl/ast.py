"""Rule program data model: actions, condition trees, rules and rule sets."""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from typing import Mapping, Union

# Percept vocabulary. Belief fields are addressable from conditions too.
NUMERIC_PERCEPT_FIELDS = ("distance", "speed")
BOOLEAN_PERCEPT_FIELDS = ("classifier_detect", "sonar_trip", "voted_trip", "contact")
NUMERIC_BELIEF_FIELDS = ("ticks_since_trip",)
BOOLEAN_BELIEF_FIELDS = ("trip_latched",)

NUMERIC_FIELDS = NUMERIC_PERCEPT_FIELDS + NUMERIC_BELIEF_FIELDS
BOOLEAN_FIELDS = BOOLEAN_PERCEPT_FIELDS + BOOLEAN_BELIEF_FIELDS
BELIEF_FIELDS = NUMERIC_BELIEF_FIELDS + BOOLEAN_BELIEF_FIELDS
# Canonical axis order for cell spaces.
FIELD_ORDER = (
    "distance",
    "speed",
    "ticks_since_trip",
    "classifier_detect",
    "sonar_trip",
    "voted_trip",
    "contact",
    "trip_latched",
)

Facts = Mapping[str, Union[float, bool]]


def _clamp_unit(v: float) -> float:
    return max(-1.0, min(1.0, float(v)))


class ActionKind(str, enum.Enum):
    STOP = "stop"
    REVERSE = "reverse"
    TURN_AWAY = "turn_away"
    HOLD_COURSE = "hold_course"
    SET_THRUST = "set_thrust"


@dataclass(frozen=True)
class Action:
    """Controller output. ``left``/``right`` are only meaningful for set_thrust."""

    kind: ActionKind
    left: float = 0.0
    right: float = 0.0

    def __post_init__(self) -> None:
        kind = ActionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ActionKind.SET_THRUST:
            object.__setattr__(self, "left", _clamp_unit(self.left))
            object.__setattr__(self, "right", _clamp_unit(self.right))
        else:
            object.__setattr__(self, "left", 0.0)
            object.__setattr__(self, "right", 0.0)

    def __str__(self) -> str:
        if self.kind is ActionKind.SET_THRUST:
            return f"set_thrust({self.left!r}, {self.right!r})"
        return self.kind.value


STOP = Action(ActionKind.STOP)
REVERSE = Action(ActionKind.REVERSE)
TURN_AWAY = Action(ActionKind.TURN_AWAY)
HOLD_COURSE = Action(ActionKind.HOLD_COURSE)


# -- condition expressions ---------------------------------------------------


@dataclass(frozen=True)
class Always:
    def __str__(self) -> str:
        return "always"


@dataclass(frozen=True)
class Atom:
    field: str

    def __str__(self) -> str:
        return self.field


COMPARISON_OPS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class Compare:
    field: str
    op: str
    value: float

    def __post_init__(self) -> None:
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"bad comparison operator {self.op!r}")
        if not math.isfinite(self.value):
            raise ValueError("comparison literal must be finite")
        object.__setattr__(self, "value", float(self.value))

    def test(self, x: float) -> bool:
        if self.op == "<":
            return x < self.value
        if self.op == "<=":
            return x <= self.value
        if self.op == ">":
            return x > self.value
        return x >= self.value

    def __str__(self) -> str:
        return f"{self.field} {self.op} {self.value!r}"


@dataclass(frozen=True)
class Not:
    item: "Condition"

    def __str__(self) -> str:
        inner = str(self.item)
        if isinstance(self.item, (And, Or)):
            inner = f"({inner})"
        return f"not {inner}"


@dataclass(frozen=True)
class And:
    items: tuple["Condition", ...]

    def __str__(self) -> str:
        return " and ".join(
            f"({c})" if isinstance(c, (And, Or)) else str(c) for c in self.items
        )


@dataclass(frozen=True)
class Or:
    items: tuple["Condition", ...]

    def __str__(self) -> str:
        return " or ".join(f"({c})" if isinstance(c, Or) else str(c) for c in self.items)


Condition = Union[Always, Atom, Compare, Not, And, Or]


def evaluate(cond: Condition, facts: Facts) -> bool:
    """Evaluate a condition against a flat field -> value mapping."""
    if isinstance(cond, Atom):
        return bool(facts[cond.field])
    if isinstance(cond, Compare):
        return cond.test(facts[cond.field])
    if isinstance(cond, And):
        return all(evaluate(c, facts) for c in cond.items)
    if isinstance(cond, Or):
        return any(evaluate(c, facts) for c in cond.items)
    if isinstance(cond, Not):
        return not evaluate(cond.item, facts)
    if isinstance(cond, Always):
        return True
    raise TypeError(f"not a condition: {cond!r}")


def walk(cond: Condition):
    """Yield every node of a condition tree, pre-order."""
    yield cond
    if isinstance(cond, (And, Or)):
        for c in cond.items:
            yield from walk(c)
    elif isinstance(cond, Not):
        yield from walk(cond.item)


def referenced_fields(cond: Condition) -> set[str]:
    return {n.field for n in walk(cond) if isinstance(n, (Atom, Compare))}


# -- programs -------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    id: str
    condition: Condition
    action: Action

    def __str__(self) -> str:
        return f"rule {self.id}: when {self.condition} do {self.action}"


@dataclass(frozen=True)
class RuleSet:
    name: str
    rules: tuple[Rule, ...]
    source_hash: str = ""

    def __post_init__(self) -> None:
        if not self.rules:
            raise ValueError("a rule set needs at least one rule")
        object.__setattr__(self, "rules", tuple(self.rules))
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise ValueError("rule identifiers must be unique")
        object.__setattr__(self, "source_hash", content_hash(self.canonical_text()))

    def canonical_text(self) -> str:
        return "".join(f"{r}\n" for r in self.rules)

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    def fields(self) -> set[str]:
        out: set[str] = set()
        for r in self.rules:
            out |= referenced_fields(r.condition)
        return out

    def without(self, rule_id: str) -> "RuleSet":
        """Copy of this rule set with one rule removed (mutation testing)."""
        return RuleSet(self.name, tuple(r for r in self.rules if r.id != rule_id))

    def structurally_equal(self, other: "RuleSet") -> bool:
        return self.rules == other.rules


def content_hash(text: str) -> str:
    """64-bit content hash as 16 hex digits."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
