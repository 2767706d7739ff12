"""Engineered safety plumbing: 1oo2 voter, watchdog, and the hard-stop guard latch.

Every state machine here is an immutable value advanced by a pure step
function; the caller owns the instance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .rbr_engine import ThrustCommand


class TickMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ChannelReading:
    tripped: bool
    healthy: bool = True
    tick: int = 0


def vote_1oo2(a: ChannelReading, b: ChannelReading) -> bool:
    """Trip if either channel trips. An unhealthy channel counts as tripped."""
    if a.tick != b.tick:
        raise TickMismatch(f"channel readings from ticks {a.tick} and {b.tick}")
    return (a.tripped or not a.healthy) or (b.tripped or not b.healthy)


@dataclass(frozen=True)
class GuardTripCommand:
    reason: str = "watchdog deadline expired"


@dataclass(frozen=True)
class WatchdogState:
    armed: bool = False
    ticks_remaining: int = 20
    deadline: int = 20

    def __post_init__(self) -> None:
        if self.deadline < 1:
            raise ValueError("watchdog deadline must be >= 1 tick")
        if not 0 <= self.ticks_remaining <= self.deadline:
            raise ValueError("ticks_remaining outside [0, deadline]")
        if not self.armed and self.ticks_remaining != self.deadline:
            raise ValueError("an idle watchdog holds a full deadline")

    @classmethod
    def idle(cls, deadline: int = 20) -> "WatchdogState":
        return cls(False, deadline, deadline)

    @property
    def elapsed(self) -> int:
        return self.deadline - self.ticks_remaining if self.armed else 0


def watchdog_step(
    w: WatchdogState, voted_trip: bool, hazard_cleared: bool
) -> tuple[WatchdogState, GuardTripCommand | None]:
    if not w.armed:
        if voted_trip:
            return replace(w, armed=True, ticks_remaining=w.deadline), None
        return w, None
    if hazard_cleared:
        return WatchdogState.idle(w.deadline), None
    remaining = w.ticks_remaining - 1
    if remaining <= 0:
        return WatchdogState.idle(w.deadline), GuardTripCommand()
    return replace(w, ticks_remaining=remaining), None


def hazard_cleared(distance: float, clear_threshold: float, closing_speed: float) -> bool:
    return distance > clear_threshold or closing_speed <= 0.0


@dataclass(frozen=True)
class GuardState:
    latched: bool = False
    demand_count: int = 0
    power_enabled: bool = True


def guard_step(g: GuardState, whisker_contact: bool, trip_cmd: bool, reset_cmd: bool) -> GuardState:
    """Relay latch. A trip in the same tick as a reset wins."""
    if whisker_contact or trip_cmd:
        demands = g.demand_count if g.latched else g.demand_count + 1
        return GuardState(latched=True, demand_count=demands, power_enabled=False)
    if reset_cmd and g.latched:
        return GuardState(latched=False, demand_count=g.demand_count, power_enabled=True)
    return g


def power_gate(g: GuardState, cmd: ThrustCommand) -> ThrustCommand:
    """Thrust that actually reaches the propellers."""
    if g.latched or not g.power_enabled:
        return ThrustCommand(0.0, 0.0)
    return cmd
