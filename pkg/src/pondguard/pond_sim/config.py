"""Scenario configuration. JSON keys mirror these field names; unknown keys are rejected."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator


class ConfigInvalid(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Circle(_Strict):
    x: float
    y: float
    r: float = Field(gt=0)


class Rect(_Strict):
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    @model_validator(mode="after")
    def _ordered(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("rect needs xmin < xmax and ymin < ymax")
        return self


class PondMap(_Strict):
    width: float = Field(gt=0)
    height: float = Field(gt=0)
    circles: tuple[Circle, ...] = ()
    rects: tuple[Rect, ...] = ()

    @model_validator(mode="after")
    def _inside(self):
        for c in self.circles:
            if c.x - c.r < 0 or c.y - c.r < 0 or c.x + c.r > self.width or c.y + c.r > self.height:
                raise ValueError(f"circle at ({c.x}, {c.y}) leaves the pond")
        for r in self.rects:
            if r.xmin < 0 or r.ymin < 0 or r.xmax > self.width or r.ymax > self.height:
                raise ValueError("rect leaves the pond")
        return self


class Pose(_Strict):
    x: float
    y: float
    heading: float = 0.0


class StartJitter(_Strict):
    """Per-episode uniform perturbation of the start pose, drawn once before tick 0."""

    xy: float = Field(0.0, ge=0)
    heading: float = Field(0.0, ge=0)


class Fault(_Strict):
    channel: Literal["sonar", "classifier"]
    mode: Literal["stuck_low", "stuck_high", "dropout"]
    start_tick: int = Field(0, ge=0)
    end_tick: Optional[int] = None  # exclusive; None = until the end
    healthy: bool = True  # reported health while stuck (dropout is always unhealthy)

    def active(self, tick: int) -> bool:
        return tick >= self.start_tick and (self.end_tick is None or tick < self.end_tick)


class SensorParams(_Strict):
    sonar_trip_threshold: float = Field(1.5, gt=0)
    sonar_sigma: float = Field(0.05, ge=0)
    classifier_detect_range: float = Field(2.0, gt=0)
    classifier_p_detect: float = Field(1.0, ge=0, le=1)
    classifier_fp_rate: float = Field(0.0, ge=0, le=1)
    classifier_fov: float = Field(0.7, ge=0, lt=3.2)  # half-angle, radians
    classifier_rays: int = Field(9, ge=1)
    faults: tuple[Fault, ...] = ()


class ControllerParams(_Strict):
    ruleset_path: Optional[str] = None
    clear_threshold: float = Field(3.0, gt=0)
    wdt_deadline: int = Field(20, ge=1)
    cruise_thrust: float = Field(0.4, ge=-1, le=1)
    reverse_thrust: float = Field(0.5, ge=-1, le=1)
    turn_thrust: float = Field(0.5, ge=-1, le=1)


class PhysicsParams(_Strict):
    k_thrust: float = 1.0
    c_drag: float = Field(0.8, ge=0)
    k_yaw: float = 1.0
    hull_radius: float = Field(0.4, gt=0)


class Goal(_Strict):
    x: float
    y: float
    radius: float = Field(gt=0)


class ScenarioConfig(_Strict):
    map: PondMap
    start: Pose
    start_jitter: StartJitter = StartJitter()
    dt: float = Field(0.1, gt=0)
    max_ticks: int = Field(600, ge=1)
    rng_seed: int = Field(0, ge=0, lt=2**64)
    sensors: SensorParams = SensorParams()
    controller: ControllerParams = ControllerParams()
    physics: PhysicsParams = PhysicsParams()
    whisker_reach: float = Field(0.15, ge=0)
    whisker_enabled: bool = True
    acceptance_threshold: float = Field(0.005, ge=0, le=1)
    goal: Optional[Goal] = None

    @model_validator(mode="after")
    def _start_inside(self):
        s = self.start
        if not (0 < s.x < self.map.width and 0 < s.y < self.map.height):
            raise ValueError("start pose outside the pond")
        return self

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return self.model_copy(update={"rng_seed": seed})

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def scenario_from_dict(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigInvalid(str(exc)) from exc


def load_scenario(path) -> ScenarioConfig:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{p}: {exc}") from exc
    return scenario_from_dict(data)
