"""Indoor acoustic propagation model.

Sums the four beacon signals at the receiver with their direct-path
delays, adds Rayleigh-faded multipath taps per beacon, and injects white
Gaussian noise at a prescribed SNR. Everything is deterministic given the
model's RNG seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .waveform import SampledSignal

SPEED_OF_SOUND = 343.0
ROOM_DIMS = (5.0, 5.0, 4.0)

# Default multipath profile for a furnished room at desk scale: five taps
# per beacon, excess delays beyond the direct path of 3..12 ms, mean tap
# power starting 6 dB below the direct path and decaying with delay. The
# decay constant reflects how fast ultrasound reverberation dies in a
# furnished room (air absorption above 1 dB/m at 40 kHz plus lossy
# bounces), so only the earliest reflections carry real energy.
# Rayleigh gain draws are capped: an echo is a full delayed replica of
# the burst and correlates at gain * burst energy at its own lag, so a
# reflection within 4 dB of the direct path would defeat any
# time-of-arrival scheme that picks the global maximum; ultrasound loses
# more than that on any wall or object bounce. Tap delays keep a minimum
# spacing so two reflections never merge into one super-unity arrival on
# the sample grid.
N_TAPS = 5
EXCESS_DELAY_RANGE = (0.003, 0.012)
FIRST_TAP_DB = -6.0
TAP_DECAY_TIME = 0.0015
MAX_TAP_GAIN = 0.6
MIN_TAP_SPACING = 0.0003


@dataclass(frozen=True)
class BeaconLayout:
    """Positions of the four ultrasonic transmitter beacons, in meters."""

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.shape != (4, 3):
            raise ValueError(f"expected 4 beacons with xyz coordinates, got shape {pos.shape}")
        for i in range(4):
            for j in range(i + 1, 4):
                if np.allclose(pos[i], pos[j]):
                    raise ValueError(f"beacons {i} and {j} coincide")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __iter__(self):
        return iter(self.positions)


# Baseline beacon coordinates used by the preliminary-stage experiments,
# and the placement-optimized coordinates that the default experiments
# compare against.
ORIGINAL_LAYOUT = BeaconLayout(
    positions=np.array(
        [[2.5, 0.0, 1.5], [5.0, 2.5, 2.5], [2.5, 5.0, 2.0], [0.0, 5.0, 3.0]]
    )
)
OPTIMIZED_LAYOUT = BeaconLayout(
    positions=np.array(
        [[4.5, 0.0, 2.5], [5.0, 4.0, 3.5], [1.0, 5.0, 2.0], [1.5, 2.0, 4.0]]
    )
)


@dataclass(frozen=True)
class Scene:
    """Room box, beacon layout, and receiver position."""

    room_dims: tuple[float, float, float]
    beacons: BeaconLayout
    receiver_position: np.ndarray

    def __post_init__(self):
        dims = tuple(float(d) for d in self.room_dims)
        if any(d <= 0 for d in dims):
            raise ValueError("room dimensions must be positive")
        rx = np.asarray(self.receiver_position, dtype=float)
        if rx.shape != (3,):
            raise ValueError("receiver position must be a 3-vector")
        if not _inside_box(rx, dims):
            raise ValueError(f"receiver {rx} is not strictly inside the room {dims}")
        for i, b in enumerate(self.beacons.positions):
            if not _inside_box(b, dims, allow_boundary=True):
                raise ValueError(f"beacon {i} at {b} lies outside the room {dims}")
        object.__setattr__(self, "room_dims", dims)
        object.__setattr__(self, "receiver_position", rx)


def _inside_box(p: np.ndarray, dims: tuple[float, float, float], allow_boundary: bool = False) -> bool:
    if allow_boundary:
        return all(0.0 <= p[i] <= dims[i] for i in range(3))
    return all(0.0 < p[i] < dims[i] for i in range(3))


@dataclass(frozen=True)
class MultipathTap:
    """One reflected path: absolute arrival delay and amplitude gain."""

    delay: float
    gain: float

    def __post_init__(self):
        if self.delay <= 0:
            raise ValueError("tap delay must be positive")
        if abs(self.gain) >= 1.0:
            raise ValueError("tap gain magnitude must be below 1")


@dataclass(frozen=True)
class ChannelModel:
    """Per-beacon multipath tap sets plus the AWGN level.

    snr_db of None (or +inf) disables noise. The seed makes the noise
    realization reproducible; multipath taps are carried explicitly so a
    trial's channel is fully pinned down by this object.
    """

    taps_per_beacon: tuple[tuple[MultipathTap, ...], ...] = ((), (), (), ())
    snr_db: float | None = None
    speed_of_sound: float = SPEED_OF_SOUND
    rng_seed: int = 0

    def __post_init__(self):
        if self.speed_of_sound <= 0:
            raise ValueError("speed of sound must be positive")
        taps = tuple(tuple(t) for t in self.taps_per_beacon)
        if len(taps) != 4:
            raise ValueError("expected one tap list per beacon (4 total)")
        object.__setattr__(self, "taps_per_beacon", taps)


def direct_delay(scene: Scene, beacon_index: int, c: float = SPEED_OF_SOUND) -> float:
    """One-way propagation delay from a beacon to the receiver, in seconds."""
    beacon = scene.beacons.positions[beacon_index]
    distance = float(np.linalg.norm(beacon - scene.receiver_position))
    return distance / c


def sample_multipath(
    scene: Scene,
    rng: np.random.Generator,
    n_taps: int = N_TAPS,
    excess_delay_range: tuple[float, float] = EXCESS_DELAY_RANGE,
    first_tap_db: float = FIRST_TAP_DB,
    decay_time: float = TAP_DECAY_TIME,
    c: float = SPEED_OF_SOUND,
    min_spacing: float = MIN_TAP_SPACING,
) -> tuple[tuple[MultipathTap, ...], ...]:
    """Draw one Rayleigh-faded multipath realization for every beacon.

    Excess delays are uniform over excess_delay_range with pairwise
    spacing of at least min_spacing; the mean tap power starts
    first_tap_db below the direct path and decays exponentially with
    excess delay (time constant decay_time). Gain magnitudes are Rayleigh
    draws around that profile, clipped at MAX_TAP_GAIN, with random sign.
    """
    lo, hi = excess_delay_range
    if not 0 < lo < hi:
        raise ValueError("excess delay range must satisfy 0 < min < max")
    if min_spacing * (n_taps - 1) >= (hi - lo):
        raise ValueError("excess delay range too narrow for the tap spacing")
    p0 = 10.0 ** (first_tap_db / 10.0)
    taps_all = []
    for i in range(4):
        tau0 = direct_delay(scene, i, c)
        excess = _spaced_uniform(rng, lo, hi, n_taps, min_spacing)
        mean_power = p0 * np.exp(-(excess - lo) / decay_time)
        # Rayleigh scale sigma gives E[g^2] = 2 sigma^2 = mean_power
        mags = rng.rayleigh(scale=np.sqrt(mean_power / 2.0))
        mags = np.minimum(mags, MAX_TAP_GAIN)
        signs = rng.choice((-1.0, 1.0), size=n_taps)
        taps_all.append(
            tuple(
                MultipathTap(delay=tau0 + float(e), gain=float(s * m))
                for e, m, s in zip(excess, mags, signs)
            )
        )
    return tuple(taps_all)


def _spaced_uniform(
    rng: np.random.Generator, lo: float, hi: float, n: int, min_spacing: float
) -> np.ndarray:
    """Sorted uniform draws with a minimum pairwise gap (rejection)."""
    for _ in range(1000):
        draws = np.sort(rng.uniform(lo, hi, size=n))
        if n < 2 or np.min(np.diff(draws)) >= min_spacing:
            return draws
    raise RuntimeError("could not draw spaced tap delays; range too tight")


def apply_channel(
    tx_signals: list[SampledSignal], scene: Scene, model: ChannelModel
) -> SampledSignal:
    """Propagate the four beacon signals to the receiver and add noise.

    Each beacon contributes its signal delayed by the direct-path delay
    plus one attenuated copy per multipath tap; all delays are rounded to
    the nearest sample. The output is long enough that no delayed copy is
    truncated. White Gaussian noise is scaled so that
    total-signal-power / noise-power equals 10^(snr_db/10).

    Raises:
        ValueError: If the four signals disagree on sample rate, or a tap
            arrives no later than its beacon's direct path.
    """
    if len(tx_signals) != 4:
        raise ValueError("expected exactly 4 transmit signals")
    fs = tx_signals[0].sample_rate
    if any(s.sample_rate != fs for s in tx_signals):
        raise ValueError("transmit signals must share one sample rate")

    arrivals = []  # (delay_samples, gain, samples)
    for i, sig in enumerate(tx_signals):
        tau0 = direct_delay(scene, i, model.speed_of_sound)
        n0 = int(round(tau0 * fs))
        arrivals.append((n0, 1.0, sig.samples))
        for tap in model.taps_per_beacon[i]:
            if tap.delay <= tau0:
                raise ValueError(
                    f"beacon {i} tap delay {tap.delay}s not beyond direct path {tau0}s"
                )
            arrivals.append((int(round(tap.delay * fs)), tap.gain, sig.samples))

    out_len = max(n + s.size for n, _, s in arrivals)
    clean = np.zeros(out_len)
    for n, g, s in arrivals:
        clean[n : n + s.size] += g * s

    noisy = clean
    if model.snr_db is not None and not math.isinf(model.snr_db):
        signal_power = float(np.mean(clean**2))
        noise_power = signal_power / 10.0 ** (model.snr_db / 10.0)
        rng = np.random.default_rng(model.rng_seed)
        noisy = clean + rng.normal(0.0, math.sqrt(noise_power), size=out_len)
    return SampledSignal(samples=noisy, sample_rate=fs)
