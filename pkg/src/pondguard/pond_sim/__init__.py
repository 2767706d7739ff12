"""Deterministic 2-D pond simulation of the survey vehicle and its safety loop."""

from .config import (
    Circle,
    ConfigInvalid,
    Fault,
    PondMap,
    Pose,
    Rect,
    ScenarioConfig,
    load_scenario,
    scenario_from_dict,
)
from .dynamics import AsvState, normalize_angle, step_dynamics
from .episode import TRACE_HEADER, EpisodeResult, Outcome, TickRecord, run_episode, trace_csv
from .geometry import PoseOutsidePond, clearance, raycast_distance, surface_distance
from .sensors import SensorFrame, sense

__all__ = [
    "AsvState", "Circle", "ConfigInvalid", "EpisodeResult", "Fault", "Outcome", "PondMap",
    "Pose", "PoseOutsidePond", "Rect", "ScenarioConfig", "SensorFrame", "TRACE_HEADER",
    "TickRecord", "clearance", "load_scenario", "normalize_angle", "raycast_distance",
    "run_episode", "scenario_from_dict", "sense", "step_dynamics", "surface_distance",
    "trace_csv",
]
