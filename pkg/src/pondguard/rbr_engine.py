"""Sense-decide-act controller loop.

The same three functions (:func:`update_beliefs`, :func:`deliberate`,
:func:`act`) drive the simulator and the model checker, so a verified rule
program is the program that runs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .rule_dsl.ast import HOLD_COURSE, Action, ActionKind, RuleSet, evaluate

SENTINEL_DISTANCE = 1e9


@dataclass(frozen=True)
class Percept:
    distance: float = SENTINEL_DISTANCE
    classifier_detect: bool = False
    sonar_trip: bool = False
    voted_trip: bool = False
    contact: bool = False
    speed: float = 0.0


@dataclass(frozen=True)
class BeliefState:
    last_action: Action = HOLD_COURSE
    trip_latched: bool = False
    ticks_since_trip: int = 0


@dataclass(frozen=True)
class AgentStep:
    beliefs_after: BeliefState
    action: Action
    fired_rule: str


@dataclass(frozen=True)
class ControlParams:
    cruise_thrust: float = 0.4
    reverse_thrust: float = 0.5
    turn_thrust: float = 0.5


@dataclass(frozen=True)
class ThrustCommand:
    left: float
    right: float


def update_beliefs(b: BeliefState, p: Percept, clear_threshold: float = 3.0) -> BeliefState:
    latched = b.trip_latched
    if p.voted_trip:
        latched = True
    elif p.distance > clear_threshold:
        latched = False
    ticks = b.ticks_since_trip + 1 if latched else 0
    return replace(b, trip_latched=latched, ticks_since_trip=ticks)


def facts(b: BeliefState, p: Percept) -> dict[str, float | bool]:
    """Flat view of percept and belief fields, as rule conditions see them."""
    return {
        "distance": p.distance,
        "classifier_detect": p.classifier_detect,
        "sonar_trip": p.sonar_trip,
        "voted_trip": p.voted_trip,
        "contact": p.contact,
        "speed": p.speed,
        "trip_latched": b.trip_latched,
        "ticks_since_trip": b.ticks_since_trip,
    }


def deliberate(b: BeliefState, p: Percept, rs: RuleSet) -> AgentStep:
    """First rule (file order) whose condition holds picks the action."""
    view = facts(b, p)
    for rule in rs.rules:
        if evaluate(rule.condition, view):
            return AgentStep(replace(b, last_action=rule.action), rule.action, rule.id)
    raise ValueError(f"rule set {rs.name!r} has no applicable rule; validate it first")


def act(a: Action, params: ControlParams = ControlParams(), obstacle_bearing: float = 0.0) -> ThrustCommand:
    """Map an action to differential thrust.

    turn_away yaws away from the obstacle: starboard when it bears to port
    (bearing > 0), otherwise port.
    """
    kind = a.kind
    if kind is ActionKind.STOP:
        return ThrustCommand(0.0, 0.0)
    if kind is ActionKind.REVERSE:
        r = params.reverse_thrust
        return ThrustCommand(-r, -r)
    if kind is ActionKind.TURN_AWAY:
        t = params.turn_thrust
        if obstacle_bearing > 0:
            return ThrustCommand(t, -t)
        return ThrustCommand(-t, t)
    if kind is ActionKind.HOLD_COURSE:
        c = params.cruise_thrust
        return ThrustCommand(c, c)
    return ThrustCommand(max(-1.0, min(1.0, a.left)), max(-1.0, min(1.0, a.right)))


class Controller:
    """Owns one belief state; drive it from a single caller."""

    def __init__(self, rs: RuleSet, params: ControlParams = ControlParams(), clear_threshold: float = 3.0):
        self.rs = rs
        self.params = params
        self.clear_threshold = clear_threshold
        self.beliefs = BeliefState()

    def decide(self, p: Percept) -> AgentStep:
        b = update_beliefs(self.beliefs, p, self.clear_threshold)
        step = deliberate(b, p, self.rs)
        self.beliefs = step.beliefs_after
        return step
