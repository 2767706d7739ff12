"""Environment abstraction and explicit-state exploration of the real controller."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Literal, Sequence

from pydantic import BaseModel, ConfigDict, Field

from ..rbr_engine import (
    SENTINEL_DISTANCE,
    AgentStep,
    BeliefState,
    Percept,
    deliberate,
    update_beliefs,
)
from ..rule_dsl.ast import (
    BELIEF_FIELDS,
    BOOLEAN_FIELDS,
    HOLD_COURSE,
    NUMERIC_FIELDS,
    STOP,
    Action,
    RuleSet,
)
from ..rule_dsl.cells import numeric_pieces, thresholds_by_field
from ..safety_kernel import ChannelReading, WatchdogState, hazard_cleared, vote_1oo2, watchdog_step

CHANNEL_FIELDS = ("classifier_detect", "sonar_trip", "voted_trip")


class EnvSpec(BaseModel):
    """Knobs for building an :class:`EnvAbstraction` (JSON-loadable)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    clear_threshold: float = Field(3.0, gt=0)
    wdt_deadline: int = Field(20, ge=1)
    extra_fields: tuple[str, ...] = ("contact", "voted_trip")
    channel_faults: bool = True
    transitions: Literal["continuous", "free"] = "continuous"
    initial: Literal["all", "clear"] = "all"
    default_speed: float = 0.5


@dataclass(frozen=True)
class EnvAbstraction:
    """Finite set of percept cells with a total transition relation."""

    fields: tuple[str, ...]
    percepts: tuple[Percept, ...]
    successors: tuple[tuple[int, ...], ...]
    initial_cells: tuple[int, ...]
    clear_threshold: float = 3.0
    wdt_deadline: int = 20
    ticks_cap: int = 21

    def __post_init__(self) -> None:
        if not self.initial_cells:
            raise ValueError("environment needs at least one initial cell")
        if len(self.successors) != len(self.percepts):
            raise ValueError("one successor list per cell")
        if any(not s for s in self.successors):
            raise ValueError("transition relation must be total")

    def __len__(self) -> int:
        return len(self.percepts)

    @classmethod
    def single_cell(cls, percept: Percept = Percept(), **params) -> "EnvAbstraction":
        return cls((), (percept,), ((0,),), (0,), **params)

    @classmethod
    def from_ruleset(cls, rs: RuleSet, spec: EnvSpec = EnvSpec()) -> "EnvAbstraction":
        unknown = set(spec.extra_fields) - set(NUMERIC_FIELDS) - set(BOOLEAN_FIELDS)
        if unknown:
            raise ValueError(f"unknown environment fields: {sorted(unknown)}")
        wanted = (rs.fields() | set(spec.extra_fields)) - set(BELIEF_FIELDS)
        thresholds = thresholds_by_field(rs)
        if "distance" in wanted:
            thresholds.setdefault("distance", []).append((">", spec.clear_threshold))

        numeric_axes = []
        for f in ("distance", "speed"):
            if f in wanted:
                pieces = numeric_pieces(thresholds.get(f, []))
                values = [p.representative for p in pieces]
                if f == "distance" and values[0] < 0:
                    # keep the nearest band physical: distances are >= 0
                    values[0] = pieces[0].hi / 2 if pieces[0].hi > 0 else 0.0
                numeric_axes.append((f, values))

        channel_combos: list[dict[str, bool]] = []
        channel_wanted = [f for f in CHANNEL_FIELDS if f in wanted]
        if spec.channel_faults:
            seen = set()
            for ct, ch, st, sh in itertools.product((False, True), (True, False), (False, True), (True, False)):
                voted = vote_1oo2(ChannelReading(ct, ch), ChannelReading(st, sh))
                combo = {"classifier_detect": ct, "sonar_trip": st, "voted_trip": voted}
                key = tuple(combo[f] for f in channel_wanted)
                if key not in seen:
                    seen.add(key)
                    channel_combos.append(combo)
            free_bools = [f for f in BOOLEAN_FIELDS if f in wanted and f not in CHANNEL_FIELDS]
        else:
            channel_combos.append({})
            channel_wanted = []
            free_bools = [f for f in BOOLEAN_FIELDS if f in wanted]

        percepts: list[Percept] = []
        coords: list[tuple[int, ...]] = []
        clear_flags: list[bool] = []
        num_ranges = [range(len(vals)) for _, vals in numeric_axes]
        dist_axis = next((k for k, (f, _) in enumerate(numeric_axes) if f == "distance"), None)
        for num_idx in itertools.product(*num_ranges):
            far = dist_axis is None or num_idx[dist_axis] == len(num_ranges[dist_axis]) - 1
            for bools in itertools.product((False, True), repeat=len(free_bools)):
                for combo in channel_combos:
                    kw: dict = {"distance": SENTINEL_DISTANCE, "speed": spec.default_speed}
                    for (f, vals), i in zip(numeric_axes, num_idx):
                        kw[f] = vals[i]
                    kw.update(combo)
                    kw.update(zip(free_bools, bools))
                    percepts.append(Percept(**kw))
                    coords.append(num_idx)
                    clear_flags.append(far and not any(bools) and not any(combo.values()))

        n = len(percepts)
        if spec.transitions == "free":
            succ = tuple(tuple(range(n)) for _ in range(n))
        else:
            succ = tuple(
                tuple(j for j in range(n) if all(abs(a - b) <= 1 for a, b in zip(coords[i], coords[j])))
                for i in range(n)
            )
        if spec.initial == "all":
            initial = tuple(range(n))
        else:
            initial = tuple(i for i in range(n) if clear_flags[i])
        fields = tuple(f for f, _ in numeric_axes) + tuple(free_bools) + tuple(channel_wanted)
        return cls(
            fields=fields,
            percepts=tuple(percepts),
            successors=succ,
            initial_cells=initial,
            clear_threshold=spec.clear_threshold,
            wdt_deadline=spec.wdt_deadline,
            ticks_cap=ticks_cap(rs, spec.wdt_deadline),
        )


def ticks_cap(rs: RuleSet, wdt_deadline: int) -> int:
    """Largest ticks_since_trip value worth distinguishing."""
    cap = wdt_deadline + 1
    for _, t in thresholds_by_field(rs).get("ticks_since_trip", []):
        cap = max(cap, int(t) + 2)
    return cap


@dataclass(frozen=True)
class ModelState:
    beliefs: BeliefState
    env_cell: int
    last_action: Action
    wdt_armed: bool = False
    wdt_counter: int = 0

    def watchdog(self, deadline: int) -> WatchdogState:
        if not self.wdt_armed:
            return WatchdogState.idle(deadline)
        return WatchdogState(True, deadline - self.wdt_counter, deadline)


def initial_state(cell: int) -> ModelState:
    return ModelState(BeliefState(), cell, HOLD_COURSE, False, 0)


@dataclass(frozen=True)
class ModelParams:
    """What a replayer needs to re-run the model step without the environment."""

    clear_threshold: float
    wdt_deadline: int
    ticks_cap: int


def model_step(
    state: ModelState, percept: Percept, rs: RuleSet, params: ModelParams
) -> tuple[AgentStep, BeliefState, Action, bool, int]:
    """One controller tick from ``state`` on ``percept``.

    Returns (agent step, beliefs carried forward, effective action, watchdog
    armed, watchdog counter). A watchdog escalation overrides the action with
    the guard's complete stop.
    """
    b = update_beliefs(state.beliefs, percept, params.clear_threshold)
    if b.ticks_since_trip > params.ticks_cap:
        b = BeliefState(b.last_action, b.trip_latched, params.ticks_cap)
    step = deliberate(b, percept, rs)
    w, escalation = watchdog_step(
        state.watchdog(params.wdt_deadline),
        percept.voted_trip,
        hazard_cleared(percept.distance, params.clear_threshold, percept.speed),
    )
    effective = STOP if escalation is not None else step.action
    return step, step.beliefs_after, effective, w.armed, w.elapsed


@dataclass
class StateGraph:
    env: EnvAbstraction
    ruleset_hash: str
    params: ModelParams
    states: list[ModelState] = field(default_factory=list)
    succ: list[tuple[int, ...] | None] = field(default_factory=list)
    steps: list[AgentStep | None] = field(default_factory=list)
    parent: list[int] = field(default_factory=list)
    depth: list[int] = field(default_factory=list)
    initial: list[int] = field(default_factory=list)
    truncated: str | None = None

    def __len__(self) -> int:
        return len(self.states)

    @property
    def transitions(self) -> int:
        return sum(len(s) for s in self.succ if s is not None)

    @property
    def complete(self) -> bool:
        return self.truncated is None

    def expanded(self, i: int) -> bool:
        return self.succ[i] is not None

    def percept(self, i: int) -> Percept:
        return self.env.percepts[self.states[i].env_cell]

    def path_to(self, i: int) -> list[int]:
        path = [i]
        while self.parent[path[-1]] >= 0:
            path.append(self.parent[path[-1]])
        return path[::-1]


class LimitExceeded(Exception):
    def __init__(self, kind: str, graph: StateGraph):
        self.kind = kind
        self.graph = graph
        super().__init__(f"exploration limit hit: max_{kind}")


@dataclass(frozen=True)
class Limits:
    max_states: int = 1_000_000
    max_depth: int = 100_000


def build_state_space(rs: RuleSet, env: EnvAbstraction, limits: Limits = Limits()) -> StateGraph:
    """Breadth-first exploration from every initial cell.

    Successors come from running :func:`model_step` (the real engine) on the
    state's cell percept and pairing the outcome with each environment move.
    Raises :class:`LimitExceeded` carrying the partial graph.
    """
    params = ModelParams(env.clear_threshold, env.wdt_deadline, env.ticks_cap)
    g = StateGraph(env, rs.source_hash, params)
    index: dict[ModelState, int] = {}

    def add(s: ModelState, parent: int, depth: int) -> int | None:
        if s in index:
            return index[s]
        if len(g.states) >= limits.max_states:
            g.truncated = g.truncated or "states"
            return None
        if depth > limits.max_depth:
            g.truncated = g.truncated or "depth"
            return None
        index[s] = len(g.states)
        g.states.append(s)
        g.succ.append(None)
        g.steps.append(None)
        g.parent.append(parent)
        g.depth.append(depth)
        queue.append(index[s])
        return index[s]

    queue: deque[int] = deque()
    for cell in env.initial_cells:
        i = add(initial_state(cell), -1, 0)
        if i is not None and i not in g.initial:
            g.initial.append(i)

    cache: dict[tuple, tuple] = {}
    while queue:
        i = queue.popleft()
        s = g.states[i]
        key = (s.beliefs, s.env_cell, s.wdt_armed, s.wdt_counter)
        if key not in cache:
            cache[key] = model_step(s, env.percepts[s.env_cell], rs, params)
        step, beliefs, effective, armed, counter = cache[key]
        out: list[int] = []
        missing = False
        for cell in env.successors[s.env_cell]:
            j = add(ModelState(beliefs, cell, effective, armed, counter), i, g.depth[i] + 1)
            if j is None:
                missing = True
            elif j not in out:
                out.append(j)
        if missing:
            # partially expanded states stay unexpanded: their successor set is unknown
            continue
        g.succ[i] = tuple(out)
        g.steps[i] = step

    if g.truncated:
        raise LimitExceeded(g.truncated, g)
    return g


def reachable_cells(env: EnvAbstraction) -> Sequence[int]:
    seen = set(env.initial_cells)
    todo = list(env.initial_cells)
    while todo:
        c = todo.pop()
        for n in env.successors[c]:
            if n not in seen:
                seen.add(n)
                todo.append(n)
    return sorted(seen)
