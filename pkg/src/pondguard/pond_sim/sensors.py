"""Sonar, classifier stub and whisker channels, with scheduled faults.

Per tick the generator is drawn in a fixed order regardless of faults or
branches: sonar noise (normal), classifier detection (uniform), classifier
false positive (uniform).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rbr_engine import SENTINEL_DISTANCE
from ..safety_kernel import ChannelReading
from .config import Fault, PondMap, ScenarioConfig
from .dynamics import AsvState
from .geometry import clearance, fan, raycast_distance


@dataclass(frozen=True)
class SensorFrame:
    sonar: ChannelReading
    sonar_distance: float
    classifier: ChannelReading
    whisker_contact: bool
    obstacle_bearing: float  # bearing of the closest classifier ray
    true_distance: float  # noiseless heading-ray distance
    clearance: float  # hull-to-nearest-surface gap, any direction


def _active_fault(faults: tuple[Fault, ...], channel: str, tick: int) -> Fault | None:
    for f in faults:
        if f.channel == channel and f.active(tick):
            return f
    return None


def sense(s: AsvState, m: PondMap, cfg: ScenarioConfig, rng: np.random.Generator, tick: int) -> SensorFrame:
    sp = cfg.sensors
    noise = float(rng.standard_normal())
    u_detect = float(rng.random())
    u_false = float(rng.random())

    true_d = raycast_distance(m, s.x, s.y, s.heading, s.hull_radius)
    sonar_d = max(0.0, true_d + sp.sonar_sigma * noise)
    sonar_trip, sonar_ok = sonar_d < sp.sonar_trip_threshold, True
    fault = _active_fault(sp.faults, "sonar", tick)
    if fault is not None:
        if fault.mode == "stuck_high":
            sonar_d, sonar_trip, sonar_ok = SENTINEL_DISTANCE, False, fault.healthy
        elif fault.mode == "stuck_low":
            sonar_d, sonar_trip, sonar_ok = 0.0, True, fault.healthy
        else:
            sonar_d, sonar_trip, sonar_ok = SENTINEL_DISTANCE, False, False

    rays = fan(m, s.x, s.y, s.heading, sp.classifier_fov, sp.classifier_rays, s.hull_radius)
    # closest ray wins; ties go to the ray nearest the bow
    bearing, cone_d = min(rays, key=lambda r: (r[1], abs(r[0]), -r[0]))
    if cone_d <= sp.classifier_detect_range:
        clf_trip = u_detect < sp.classifier_p_detect
    else:
        clf_trip = u_false < sp.classifier_fp_rate
    clf_ok = True
    fault = _active_fault(sp.faults, "classifier", tick)
    if fault is not None:
        if fault.mode == "stuck_high":
            clf_trip, clf_ok = False, fault.healthy
        elif fault.mode == "stuck_low":
            clf_trip, clf_ok = True, fault.healthy
        else:
            clf_trip, clf_ok = False, False

    gap = clearance(m, s.x, s.y, s.hull_radius)
    contact = cfg.whisker_enabled and gap <= cfg.whisker_reach
    return SensorFrame(
        sonar=ChannelReading(sonar_trip, sonar_ok, tick),
        sonar_distance=sonar_d,
        classifier=ChannelReading(clf_trip, clf_ok, tick),
        whisker_contact=contact,
        obstacle_bearing=bearing,
        true_distance=true_d,
        clearance=gap,
    )
