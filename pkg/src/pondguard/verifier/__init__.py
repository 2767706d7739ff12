"""Explicit-state program model checker for rule programs."""

from .check import (
    Counterexample,
    Inconclusive,
    ReplayMismatch,
    ReplayReport,
    TraceStep,
    Verdict,
    check,
    replay,
    report_json,
    verdict_json,
)
from .model import (
    EnvAbstraction,
    EnvSpec,
    LimitExceeded,
    Limits,
    ModelParams,
    ModelState,
    StateGraph,
    build_state_space,
    model_step,
)
from .props import Property, PropertySyntaxError, parse_properties, parse_property

__all__ = [
    "Counterexample", "EnvAbstraction", "EnvSpec", "Inconclusive", "LimitExceeded", "Limits",
    "ModelParams", "ModelState", "Property", "PropertySyntaxError", "ReplayMismatch",
    "ReplayReport", "StateGraph", "TraceStep", "Verdict", "build_state_space", "check",
    "model_step", "parse_properties", "parse_property", "replay", "report_json", "verdict_json",
]
