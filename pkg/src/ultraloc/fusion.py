"""Height refinement from a ceiling-facing rangefinder.

A transceiver on the drone pings the ceiling; half the round-trip time
times the speed of sound is the gap to the ceiling, and the room height
minus that gap is an independent height estimate. A static weighted sum
blends it with the trilateration z coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SPEED_OF_SOUND

DEFAULT_W1 = 0.2  # trilateration z weight; the ceiling channel is the cleaner one
DEFAULT_W2 = 0.8
ECHO_NOISE_STD = 10e-6  # seconds of round-trip timing jitter


@dataclass(frozen=True)
class HeightMeasurement:
    """One ceiling-echo reading and the height derived from it."""

    round_trip_time: float
    ceiling_height: float
    derived_height: float

    def __post_init__(self):
        if not 0.0 <= self.derived_height <= self.ceiling_height:
            raise ValueError("derived height must lie within [0, ceiling height]")


@dataclass(frozen=True)
class FusionWeights:
    """Convex weights for blending the two height estimates."""

    w1: float = DEFAULT_W1
    w2: float = DEFAULT_W2

    def __post_init__(self):
        if not (0.0 <= self.w1 <= 1.0 and 0.0 <= self.w2 <= 1.0):
            raise ValueError("weights must lie in [0, 1]")
        if abs(self.w1 + self.w2 - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


def inverse_variance_weights(var1: float, var2: float) -> FusionWeights:
    """Weights proportional to 1/variance of each height estimate."""
    if var1 <= 0 or var2 <= 0:
        raise ValueError("variances must be positive")
    w1 = (1.0 / var1) / (1.0 / var1 + 1.0 / var2)
    return FusionWeights(w1=w1, w2=1.0 - w1)


def simulate_ceiling_echo(
    true_height: float,
    ceiling_height: float,
    c: float = SPEED_OF_SOUND,
    noise_std: float = ECHO_NOISE_STD,
    rng: np.random.Generator | None = None,
    obstruction_prob: float = 0.0,
) -> HeightMeasurement:
    """Simulate one round trip of the upward-facing rangefinder.

    The noiseless round-trip time is 2 * (H - h) / c; Gaussian timing
    jitter of noise_std seconds is added when an RNG is supplied. With
    probability obstruction_prob an object between drone and ceiling
    returns the echo early. The derived height is clamped into [0, H].
    """
    if not 0.0 < true_height < ceiling_height:
        raise ValueError("true height must lie strictly between floor and ceiling")
    t = 2.0 * (ceiling_height - true_height) / c
    if rng is not None and obstruction_prob > 0 and rng.random() < obstruction_prob:
        t = rng.uniform(0.0, t)
    if rng is not None and noise_std > 0:
        t += rng.normal(0.0, noise_std)
    t = max(t, 0.0)
    gap = c * t / 2.0
    derived = min(max(ceiling_height - gap, 0.0), ceiling_height)
    return HeightMeasurement(
        round_trip_time=t, ceiling_height=ceiling_height, derived_height=derived
    )


def fuse_height(z_stage1: float, h_drone: float, weights: FusionWeights) -> float:
    """Weighted blend of the trilateration z and the rangefinder height."""
    return weights.w1 * z_stage1 + weights.w2 * h_drone
