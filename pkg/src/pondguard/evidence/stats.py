"""Consequence banding and binomial confidence intervals."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

Z95 = 1.959964


class NegativeDose(ValueError):
    pass


class AlarpBand(str, enum.Enum):
    BELOW_2 = "below_2"
    BAND_2_TO_20 = "band_2_to_20"
    ABOVE_20 = "above_20"


def alarp_band(dose_msv: float) -> AlarpBand:
    """Both 2 and 20 mSv fall in the middle band."""
    if dose_msv < 0 or math.isnan(dose_msv):
        raise NegativeDose(f"dose must be >= 0 mSv, got {dose_msv}")
    if dose_msv < 2.0:
        return AlarpBand.BELOW_2
    if dose_msv <= 20.0:
        return AlarpBand.BAND_2_TO_20
    return AlarpBand.ABOVE_20


@dataclass(frozen=True)
class ConsequenceProfile:
    dose_msv: float
    band: AlarpBand

    @classmethod
    def of(cls, dose_msv: float) -> "ConsequenceProfile":
        return cls(dose_msv, alarp_band(dose_msv))

    def __post_init__(self) -> None:
        if self.band is not alarp_band(self.dose_msv):
            raise ValueError("band does not match dose")


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for k successes in n trials."""
    if n < 1 or not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n and n >= 1, got k={k}, n={n}")
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    low = 0.0 if k == 0 else max(0.0, min(p, centre - half))
    high = 1.0 if k == n else min(1.0, max(p, centre + half))
    return low, high
