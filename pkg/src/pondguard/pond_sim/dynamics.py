"""Differential-thrust surface kinematics with first-order drag."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..rbr_engine import ThrustCommand
from .config import PhysicsParams


def normalize_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    r = math.remainder(a, 2 * math.pi)
    return math.pi if r <= -math.pi else r


@dataclass(frozen=True)
class AsvState:
    x: float
    y: float
    heading: float = 0.0
    surge: float = 0.0
    yaw_rate: float = 0.0
    thrust_left: float = 0.0
    thrust_right: float = 0.0
    hull_radius: float = 0.4


def step_dynamics(s: AsvState, cmd: ThrustCommand, phys: PhysicsParams, dt: float) -> AsvState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    left = max(-1.0, min(1.0, cmd.left))
    right = max(-1.0, min(1.0, cmd.right))
    surge = s.surge + dt * (phys.k_thrust * (left + right) / 2 - phys.c_drag * s.surge)
    yaw_rate = phys.k_yaw * (right - left)
    heading = normalize_angle(s.heading + dt * yaw_rate)
    return replace(
        s,
        x=s.x + dt * surge * math.cos(heading),
        y=s.y + dt * surge * math.sin(heading),
        heading=heading,
        surge=surge,
        yaw_rate=yaw_rate,
        thrust_left=left,
        thrust_right=right,
    )
