"""Property checking over explored state graphs, counterexample replay, and reports."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterator

from ..rbr_engine import AgentStep, BeliefState, Percept
from ..rule_dsl.ast import HOLD_COURSE, RuleSet
from .model import ModelParams, ModelState, StateGraph, model_step
from .props import (
    Implies,
    Property,
    Within,
    eval_path,
    eval_state,
    is_state_formula,
    temporal_depth,
)


class Inconclusive(Exception):
    """Truncated graph and no violation inside the explored region."""


class ReplayMismatch(Exception):
    def __init__(self, step: int, detail: str = ""):
        self.step = step
        super().__init__(f"replay diverged at step {step}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class TraceStep:
    state: ModelState
    percept: Percept
    step: AgentStep | None  # None for a frontier state of a truncated graph


@dataclass(frozen=True)
class Counterexample:
    property: Property
    steps: tuple[TraceStep, ...]
    violation_index: int
    params: ModelParams

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Verdict:
    property: Property
    holds: bool
    counterexample: Counterexample | None
    states_explored: int
    transitions: int

    def __post_init__(self) -> None:
        if not self.holds and (self.counterexample is None or not self.counterexample.steps):
            raise ValueError("a failed verdict needs a non-empty counterexample")


def _trace(g: StateGraph, path: list[int], violation_index: int, prop: Property) -> Counterexample:
    steps = tuple(TraceStep(g.states[i], g.percept(i), g.steps[i]) for i in path)
    return Counterexample(prop, steps, violation_index, g.params)


def _views(g: StateGraph, path) -> list[tuple[ModelState, Percept]]:
    return [(g.states[i], g.percept(i)) for i in path]


def check(g: StateGraph, prop: Property) -> Verdict:
    """Decide ``prop`` on ``g``.

    G(state formula): scan in BFS order, so the first violation found is a
    nearest one. G(p -> F<=k q): backward k-step fixpoint. Anything else with
    X/F<=k: enumerate successor paths of the formula's temporal depth.
    """
    body = prop.formula.body

    def verdict(cex: Counterexample | None) -> Verdict:
        if cex is None and not g.complete:
            raise Inconclusive(f"{prop.name}: no violation in the {len(g)} states explored before the limit")
        return Verdict(prop, cex is None, cex, len(g), g.transitions)

    if is_state_formula(body):
        for i, s in enumerate(g.states):
            if not eval_state(body, s, g.percept(i)):
                path = g.path_to(i)
                return verdict(_trace(g, path, len(path) - 1, prop))
        return verdict(None)

    if (
        isinstance(body, Implies)
        and isinstance(body.right, Within)
        and is_state_formula(body.left)
        and is_state_formula(body.right.f)
    ):
        return verdict(_bounded_response(g, prop, body.left, body.right.k, body.right.f))

    return verdict(_by_path_enumeration(g, prop))


def _bounded_response(g: StateGraph, prop: Property, trigger, k: int, response) -> Counterexample | None:
    n = len(g)
    miss = [not eval_state(response, g.states[i], g.percept(i)) for i in range(n)]
    # levels[j][i]: some path from i keeps the response false for j more steps
    levels = [miss]
    for _ in range(k):
        prev = levels[-1]
        levels.append(
            [
                miss[i] and g.succ[i] is not None and any(prev[t] for t in g.succ[i])
                for i in range(n)
            ]
        )
    for i in range(n):
        if levels[k][i] and eval_state(trigger, g.states[i], g.percept(i)):
            path = g.path_to(i)
            start = len(path) - 1
            cur = i
            for j in range(k, 0, -1):
                cur = next(t for t in g.succ[cur] if levels[j - 1][t])
                path.append(cur)
            return _trace(g, path, start, prop)
    return None


def _prefixes(g: StateGraph, i: int, length: int) -> Iterator[list[int]]:
    if length == 0:
        yield [i]
        return
    if g.succ[i] is None:
        return
    for t in g.succ[i]:
        for rest in _prefixes(g, t, length - 1):
            yield [i] + rest


def _by_path_enumeration(g: StateGraph, prop: Property) -> Counterexample | None:
    body = prop.formula.body
    depth = temporal_depth(body)
    for i in range(len(g)):
        for prefix in _prefixes(g, i, depth):
            if not eval_path(body, _views(g, prefix), 0):
                path = g.path_to(i)
                start = len(path) - 1
                return _trace(g, path + prefix[1:], start, prop)
    return None


# -- replay -----------------------------------------------------------------------


@dataclass(frozen=True)
class ReplayReport:
    valid: bool
    steps_checked: int
    violation_confirmed: bool


def replay(cex: Counterexample, rs: RuleSet) -> ReplayReport:
    """Re-run a counterexample's percepts through a fresh controller.

    Raises :class:`ReplayMismatch` at the first step whose state or agent
    step differs from the trace.
    """
    if not cex.steps:
        raise ReplayMismatch(0, "empty trace")
    params = cex.params
    state = ModelState(BeliefState(), cex.steps[0].state.env_cell, HOLD_COURSE, False, 0)
    views: list[tuple[ModelState, Percept]] = []
    for i, ts in enumerate(cex.steps):
        if ts.state != state:
            raise ReplayMismatch(i, "model state differs")
        views.append((state, ts.percept))
        step, beliefs, effective, armed, counter = model_step(state, ts.percept, rs, params)
        if ts.step is not None and ts.step != step:
            raise ReplayMismatch(i, f"expected rule {ts.step.fired_rule}, engine fired {step.fired_rule}")
        if i + 1 < len(cex.steps):
            state = ModelState(beliefs, cex.steps[i + 1].state.env_cell, effective, armed, counter)
    try:
        confirmed = not eval_path(cex.property.formula.body, views, cex.violation_index)
    except IndexError:
        confirmed = False
    return ReplayReport(confirmed, len(views), confirmed)


# -- JSON export ------------------------------------------------------------------


def _state_json(s: ModelState) -> dict:
    return {
        "env_cell": s.env_cell,
        "last_action": str(s.last_action),
        "trip_latched": s.beliefs.trip_latched,
        "ticks_since_trip": s.beliefs.ticks_since_trip,
        "wdt_armed": s.wdt_armed,
        "wdt_counter": s.wdt_counter,
    }


def verdict_json(v: Verdict) -> dict:
    cex = []
    if v.counterexample is not None:
        for ts in v.counterexample.steps:
            cex.append(
                {
                    "state": _state_json(ts.state),
                    "percept": asdict(ts.percept),
                    "action": str(ts.step.action) if ts.step else None,
                    "rule": ts.step.fired_rule if ts.step else None,
                }
            )
    return {
        "property": v.property.name,
        "formula": str(v.property.formula),
        "holds": v.holds,
        "states": v.states_explored,
        "transitions": v.transitions,
        "counterexample": cex,
    }


def report_json(verdicts: list[Verdict], ruleset_hash: str) -> str:
    doc = {"ruleset_hash": ruleset_hash, "verdicts": [verdict_json(v) for v in verdicts]}
    return json.dumps(doc, indent=2) + "\n"
