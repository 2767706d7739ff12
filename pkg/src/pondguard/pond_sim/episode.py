"""Closed-loop episode: sensors, voter, controller, watchdog, guard, dynamics."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ..rbr_engine import ControlParams, Controller, Percept, act
from ..rule_dsl.analysis import require_valid
from ..rule_dsl.ast import RuleSet
from ..safety_kernel import (
    GuardState,
    WatchdogState,
    guard_step,
    hazard_cleared,
    power_gate,
    vote_1oo2,
    watchdog_step,
)
from .config import ConfigInvalid, ScenarioConfig
from .dynamics import AsvState, normalize_angle, step_dynamics
from .geometry import clearance, inside_pond
from .sensors import sense

STOPPED_SURGE = 0.01

TRACE_HEADER = (
    "tick,x,y,heading,surge,thrust_l,thrust_r,sonar_dist,sonar_trip,sonar_healthy,"
    "clf_trip,clf_healthy,voted_trip,action,rule,wdt_armed,wdt_remaining,guard_latched,"
    "demand_count,contact,collision"
).split(",")


class Outcome(str, enum.Enum):
    COMPLETED = "completed"
    COLLISION = "collision"
    GUARD_STOP = "guard_stop"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class TickRecord:
    tick: int
    asv: AsvState  # state after this tick's dynamics
    sonar_distance: float
    sonar_trip: bool
    sonar_healthy: bool
    clf_trip: bool
    clf_healthy: bool
    voted_trip: bool
    action: str
    fired_rule: str
    wdt_armed: bool
    wdt_remaining: int
    wdt_escalation: bool
    guard_latched: bool
    demand_count: int
    contact: bool
    collision: bool
    thrust_in: tuple[float, float]  # command entering the dynamics, after the power gate


@dataclass
class EpisodeResult:
    outcome: Outcome
    records: list[TickRecord] = field(default_factory=list)

    @property
    def ticks(self) -> int:
        return len(self.records)

    @property
    def demand_count(self) -> int:
        return self.records[-1].demand_count if self.records else 0

    @property
    def escalations(self) -> int:
        return sum(r.wdt_escalation for r in self.records)

    @property
    def trips(self) -> int:
        return sum(r.voted_trip for r in self.records)

    def trace_csv(self) -> str:
        return trace_csv(self.records)


def _f(v: float) -> str:
    return f"{v:.6f}"


def _b(v: bool) -> str:
    return "1" if v else "0"


def trace_csv(records: list[TickRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in records:
        s = r.asv
        w.writerow(
            [
                r.tick, _f(s.x), _f(s.y), _f(s.heading), _f(s.surge), _f(s.thrust_left),
                _f(s.thrust_right), _f(r.sonar_distance), _b(r.sonar_trip), _b(r.sonar_healthy),
                _b(r.clf_trip), _b(r.clf_healthy), _b(r.voted_trip), r.action, r.fired_rule,
                _b(r.wdt_armed), r.wdt_remaining, _b(r.guard_latched), r.demand_count,
                _b(r.contact), _b(r.collision),
            ]
        )
    return buf.getvalue()


def initial_asv(cfg: ScenarioConfig, rng: np.random.Generator) -> AsvState:
    j = cfg.start_jitter
    # always draw, so jitter settings never shift the per-tick stream
    ux, uy, uh = (float(v) for v in rng.uniform(-1.0, 1.0, size=3))
    x = cfg.start.x + j.xy * ux
    y = cfg.start.y + j.xy * uy
    heading = normalize_angle(cfg.start.heading + j.heading * uh)
    s = AsvState(x, y, heading, hull_radius=cfg.physics.hull_radius)
    if not inside_pond(cfg.map, x, y) or clearance(cfg.map, x, y, s.hull_radius) <= 0:
        raise ConfigInvalid(f"start pose ({x:.3f}, {y:.3f}) overlaps the pond geometry")
    return s


def run_episode(cfg: ScenarioConfig, rs: RuleSet) -> EpisodeResult:
    """Simulate one episode. Output is a pure function of (cfg, rs)."""
    require_valid(rs)
    rng = np.random.default_rng(cfg.rng_seed)
    m = cfg.map
    cp = cfg.controller
    params = ControlParams(cp.cruise_thrust, cp.reverse_thrust, cp.turn_thrust)
    ctl = Controller(rs, params, cp.clear_threshold)
    wdt = WatchdogState.idle(cp.wdt_deadline)
    guard = GuardState()
    s = initial_asv(cfg, rng)
    bearing = 0.0
    result = EpisodeResult(Outcome.TIMEOUT)

    for tick in range(cfg.max_ticks):
        frame = sense(s, m, cfg, rng, tick)
        voted = vote_1oo2(frame.sonar, frame.classifier)
        percept = Percept(
            distance=frame.sonar_distance,
            classifier_detect=frame.classifier.tripped,
            sonar_trip=frame.sonar.tripped,
            voted_trip=voted,
            contact=frame.whisker_contact,
            speed=s.surge,
        )
        was_latched = ctl.beliefs.trip_latched
        step = ctl.decide(percept)
        if step.beliefs_after.trip_latched and not was_latched:
            bearing = frame.obstacle_bearing
        cmd = act(step.action, params, bearing)

        escalation = None
        if guard.latched:
            # the complete stop is already in force; nothing left to escalate to
            wdt = WatchdogState.idle(cp.wdt_deadline)
        else:
            wdt, escalation = watchdog_step(
                wdt, voted, hazard_cleared(percept.distance, cp.clear_threshold, s.surge)
            )
        guard = guard_step(guard, frame.whisker_contact, escalation is not None, False)
        cmd = power_gate(guard, cmd)
        s = step_dynamics(s, cmd, cfg.physics, cfg.dt)

        collided = not inside_pond(m, s.x, s.y) or clearance(m, s.x, s.y, s.hull_radius) <= 0
        result.records.append(
            TickRecord(
                tick=tick,
                asv=s,
                sonar_distance=frame.sonar_distance,
                sonar_trip=frame.sonar.tripped,
                sonar_healthy=frame.sonar.healthy,
                clf_trip=frame.classifier.tripped,
                clf_healthy=frame.classifier.healthy,
                voted_trip=voted,
                action=str(step.action),
                fired_rule=step.fired_rule,
                wdt_armed=wdt.armed,
                wdt_remaining=wdt.ticks_remaining,
                wdt_escalation=escalation is not None,
                guard_latched=guard.latched,
                demand_count=guard.demand_count,
                contact=frame.whisker_contact,
                collision=collided,
                thrust_in=(cmd.left, cmd.right),
            )
        )
        if collided:
            result.outcome = Outcome.COLLISION
            break
        if guard.latched and abs(s.surge) < STOPPED_SURGE:
            result.outcome = Outcome.GUARD_STOP
            break
        if cfg.goal is not None and math.hypot(s.x - cfg.goal.x, s.y - cfg.goal.y) <= cfg.goal.radius:
            result.outcome = Outcome.COMPLETED
            break
    return result
