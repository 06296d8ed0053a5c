"""Receiver chain: despreading, cross-correlation, and range estimation.

Ranging correlates the raw composite signal against the known transmitted
burst of one beacon (code and hop plan included). Sliding the full coded
reference is the same computation as despreading each candidate alignment
and integrating, but stays exact for delays that are not chip-aligned.
The standalone despread operation serves data recovery and diagnostics,
where the receiver clock defines the chip grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sp_signal

from .channel import SPEED_OF_SOUND
from .errors import NoPeakError
from .waveform import HopPlan, SampledSignal, WaveformConfig, generate_tx_signal


@dataclass(frozen=True)
class RangeEstimate:
    """One beacon's estimated distance and the correlation peak behind it."""

    beacon_index: int
    distance: float
    peak_sample: int
    peak_value: float


@dataclass(frozen=True)
class DespreadResult:
    """Despread waveform plus a flag for a discarded trailing partial symbol."""

    signal: SampledSignal
    truncated: bool


def despread(
    received: SampledSignal, code_row: np.ndarray, config: WaveformConfig
) -> DespreadResult:
    """Multiply each chip interval of the received signal by its code chip.

    The chip grid starts at sample 0 of the received signal (the shared
    receiver clock). A trailing partial symbol is dropped and flagged.
    """
    code_row = np.asarray(code_row, dtype=np.int64)
    sps = config.samples_per_symbol
    if sps % code_row.size != 0:
        raise ValueError(
            f"code length {code_row.size} does not divide {sps} samples/symbol"
        )
    chip_len = sps // code_row.size
    samples = received.samples
    n_whole = (samples.size // sps) * sps
    truncated = n_whole != samples.size
    n_symbols = n_whole // sps
    code_track = np.tile(np.repeat(code_row, chip_len), n_symbols)
    out = samples[:n_whole] * code_track
    return DespreadResult(
        signal=SampledSignal(samples=out, sample_rate=received.sample_rate),
        truncated=truncated,
    )


def cross_correlate(received: SampledSignal, reference: SampledSignal) -> np.ndarray:
    """Sliding inner product of the reference against the received signal.

    Returns one value per lag L in [0, len(received) - len(reference)]:
    sum_k received[k+L] * reference[k].
    """
    if len(received) == 0 or len(reference) == 0:
        raise ValueError("signals must be nonempty")
    if len(reference) > len(received):
        raise ValueError("reference must not be longer than the received signal")
    if reference.sample_rate != received.sample_rate:
        raise ValueError("sample rates differ between received and reference")
    return sp_signal.correlate(received.samples, reference.samples, mode="valid")


def estimate_range(
    received: SampledSignal,
    beacon_index: int,
    config: WaveformConfig,
    plan: HopPlan,
    code_row: np.ndarray,
    speed_of_sound: float = SPEED_OF_SOUND,
) -> RangeEstimate:
    """Estimate the distance to one beacon from the composite signal.

    Rebuilds that beacon's transmitted burst, finds the global maximum of
    the correlation magnitude, and converts the peak lag to meters via
    distance = peak_sample / sample_rate * speed_of_sound.

    Raises:
        NoPeakError: If the received signal is identically zero.
    """
    if not np.any(received.samples):
        raise NoPeakError("received signal is all zeros; no correlation peak")
    reference = generate_tx_signal(config, plan, code_row)
    corr = cross_correlate(received, reference)
    peak_sample = int(np.argmax(np.abs(corr)))
    distance = peak_sample / received.sample_rate * speed_of_sound
    return RangeEstimate(
        beacon_index=beacon_index,
        distance=distance,
        peak_sample=peak_sample,
        peak_value=float(abs(corr[peak_sample])),
    )


def decode_bits(
    received: SampledSignal,
    code_row: np.ndarray,
    plan: HopPlan,
    config: WaveformConfig,
) -> np.ndarray:
    """Recover one beacon's data bits from a time-aligned composite signal.

    Despreads with the beacon's code, demodulates each symbol against the
    known hopped carrier, and slices the sign of the integral. Walsh
    orthogonality cancels the other beacons' contributions per symbol.
    """
    result = despread(received, code_row, config)
    y = result.signal.samples
    sps = config.samples_per_symbol
    n_symbols = y.size // sps
    freqs = np.asarray(plan.center_frequencies, dtype=float)
    f_per_sample = np.repeat(freqs[plan.hop_sequence[:n_symbols]], sps)
    t = np.arange(n_symbols * sps) / config.sample_rate
    carrier = np.sin(2.0 * np.pi * f_per_sample * t + plan.carrier_phase)
    per_symbol = (y[: n_symbols * sps] * carrier).reshape(n_symbols, sps).sum(axis=1)
    bits = np.where(per_symbol >= 0, 1, -1).astype(np.int64)
    return bits
