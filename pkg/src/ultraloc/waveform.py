"""Hybrid FH-CDMA transmit waveform generation.

Each beacon transmits BPSK data bits spread by a Walsh-Hadamard code row
(four chips per bit) and carried on a sinusoid whose frequency hops once
per symbol over a bank of ultrasonic channels. All four beacons share one
hop sequence; the orthogonal codes keep them separable at the receiver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChipAlignmentError

# Ultrasonic band defaults: six 5-kHz channels between 20 and 50 kHz,
# sampled fast enough that every channel stays well below Nyquist.
SAMPLE_RATE = 340_000.0
CENTER_FREQUENCIES = (22_500.0, 27_500.0, 32_500.0, 37_500.0, 42_500.0, 47_500.0)
CHANNEL_BANDWIDTH = 5_000.0
SYMBOL_DURATION = 0.002
WALSH_ORDER = 4
BURST_BITS = 32


@dataclass(frozen=True)
class WalshMatrix:
    """Square +/-1 matrix with mutually orthogonal rows (Sylvester construction)."""

    order: int
    rows: np.ndarray

    def row(self, index: int) -> np.ndarray:
        return self.rows[index]


def walsh_hadamard(order: int) -> WalshMatrix:
    """Build the Sylvester-type Walsh-Hadamard matrix of the given order.

    Args:
        order: Matrix size; must be a power of two (1, 2, 4, 8, ...).

    Returns:
        WalshMatrix whose distinct rows have exactly zero dot product and
        whose first row is all +1.

    Raises:
        ValueError: If order is not a positive power of two.
    """
    if order < 1 or order & (order - 1) != 0:
        raise ValueError(f"Walsh-Hadamard order must be a power of two, got {order}")
    h = np.array([[1]], dtype=np.int64)
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    h.setflags(write=False)
    return WalshMatrix(order=order, rows=h)


def encode_symbol(data_bit: int, code_row: np.ndarray) -> np.ndarray:
    """Spread one +/-1 data bit into chips by multiplying with a code row."""
    if data_bit not in (-1, 1):
        raise ValueError(f"data bit must be +1 or -1, got {data_bit}")
    code_row = np.asarray(code_row)
    if code_row.size == 0:
        raise ValueError("code row must be nonempty")
    return data_bit * code_row


@dataclass(frozen=True)
class HopPlan:
    """Per-symbol frequency-hop schedule shared by transmitter and receiver.

    center_frequencies: channel centers in Hz, all inside the ultrasonic
        band [20 kHz, 50 kHz], spaced at least channel_bandwidth apart.
    hop_sequence: channel index used by each successive symbol.
    carrier_phase: phase offset of the sinusoidal carrier in radians.
    """

    center_frequencies: tuple[float, ...]
    channel_bandwidth: float
    hop_sequence: np.ndarray
    carrier_phase: float = 0.0

    def __post_init__(self):
        freqs = np.asarray(self.center_frequencies, dtype=float)
        if freqs.size == 0:
            raise ValueError("hop plan needs at least one channel")
        if np.any(freqs < 20_000.0) or np.any(freqs > 50_000.0):
            raise ValueError("channel centers must lie within [20 kHz, 50 kHz]")
        spacing = np.diff(np.sort(freqs))
        if spacing.size and np.min(spacing) < self.channel_bandwidth - 1e-9:
            raise ValueError("adjacent channels overlap at the given bandwidth")
        seq = np.asarray(self.hop_sequence, dtype=np.int64)
        if seq.size and (seq.min() < 0 or seq.max() >= freqs.size):
            raise ValueError("hop sequence entries must index the channel list")
        object.__setattr__(self, "hop_sequence", seq)


def random_hop_plan(
    n_symbols: int,
    seed: int,
    center_frequencies: tuple[float, ...] = CENTER_FREQUENCIES,
    channel_bandwidth: float = CHANNEL_BANDWIDTH,
    carrier_phase: float = 0.0,
    reuse_window: int = 2,
) -> HopPlan:
    """Draw a seeded pseudo-random hop sequence over the channel bank.

    reuse_window forbids a symbol from reusing any of the previous
    reuse_window symbols' channels. Echoes delayed by up to that many
    symbol durations then always land on a foreign-frequency dwell and
    cannot interfere with the direct path's correlation peak. The window
    must leave at least two admissible channels so the sequence stays
    random.
    """
    n_ch = len(center_frequencies)
    if reuse_window < 0 or (n_ch > 1 and reuse_window > n_ch - 2):
        raise ValueError(
            f"reuse_window must be in [0, {n_ch - 2}] for {n_ch} channels"
        )
    rng = np.random.default_rng(seed)
    seq = np.empty(n_symbols, dtype=np.int64)
    for k in range(n_symbols):
        if n_ch == 1:
            seq[k] = 0
            continue
        blocked = set(seq[max(0, k - reuse_window) : k].tolist())
        choices = [c for c in range(n_ch) if c not in blocked]
        seq[k] = choices[rng.integers(0, len(choices))]
    return HopPlan(
        center_frequencies=tuple(center_frequencies),
        channel_bandwidth=channel_bandwidth,
        hop_sequence=seq,
        carrier_phase=carrier_phase,
    )


@dataclass(frozen=True)
class WaveformConfig:
    """Transmit-side parameters for one ranging burst."""

    sample_rate: float = SAMPLE_RATE
    symbol_duration: float = SYMBOL_DURATION
    data_bits: np.ndarray = field(default_factory=lambda: np.ones(BURST_BITS, dtype=np.int64))
    code_row_index: int = 0

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.symbol_duration <= 0:
            raise ValueError("symbol_duration must be positive")
        bits = np.asarray(self.data_bits, dtype=np.int64)
        if bits.size == 0:
            raise ValueError("data_bits must be nonempty")
        if not np.all(np.isin(bits, (-1, 1))):
            raise ValueError("data_bits must be +1/-1 valued")
        object.__setattr__(self, "data_bits", bits)

    @property
    def samples_per_symbol(self) -> int:
        n = self.symbol_duration * self.sample_rate
        n_int = int(round(n))
        if abs(n - n_int) > 1e-6:
            raise ChipAlignmentError(
                f"symbol_duration * sample_rate = {n} is not a whole sample count"
            )
        return n_int


@dataclass(frozen=True)
class SampledSignal:
    """Uniformly sampled real-valued waveform."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        samples = np.asarray(self.samples, dtype=float)
        if not np.all(np.isfinite(samples)):
            raise ValueError("signal samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def energy(self) -> float:
        return float(np.sum(self.samples**2))


def generate_tx_signal(
    config: WaveformConfig, plan: HopPlan, code_row: np.ndarray
) -> SampledSignal:
    """Synthesize one beacon's FH-CDMA burst.

    Every data bit is spread into len(code_row) chips; the chips of one
    symbol gate a unit-amplitude sinusoid at that symbol's hop channel.
    The carrier argument uses global time, so the waveform is exactly the
    chip sequence times sin(2*pi*f_m*t + phase) on each symbol interval.

    Raises:
        ChipAlignmentError: If chips do not align to whole samples.
        ValueError: If the hop sequence is shorter than the data, or the
            sample rate violates Nyquist for the highest channel.
    """
    code_row = np.asarray(code_row, dtype=np.int64)
    if code_row.size == 0 or not np.all(np.isin(code_row, (-1, 1))):
        raise ValueError("code_row must be a nonempty +/-1 sequence")
    freqs = np.asarray(plan.center_frequencies, dtype=float)
    if config.sample_rate < 2.0 * freqs.max():
        raise ValueError(
            f"sample rate {config.sample_rate} Hz below Nyquist for "
            f"{freqs.max()} Hz carrier"
        )
    bits = config.data_bits
    if plan.hop_sequence.size < bits.size:
        raise ValueError("hop sequence shorter than the data burst")

    sps = config.samples_per_symbol
    if sps % code_row.size != 0:
        raise ChipAlignmentError(
            f"{sps} samples/symbol not divisible by code length {code_row.size}"
        )
    chip_len = sps // code_row.size

    # chips[k] and f[k] per output sample, built symbol by symbol
    chips = np.repeat(bits[:, None] * code_row[None, :], chip_len, axis=1).ravel()
    f_per_sample = np.repeat(freqs[plan.hop_sequence[: bits.size]], sps)
    t = np.arange(bits.size * sps) / config.sample_rate
    samples = chips * np.sin(2.0 * np.pi * f_per_sample * t + plan.carrier_phase)
    return SampledSignal(samples=samples, sample_rate=config.sample_rate)


def band_energy_fraction(
    samples: np.ndarray, sample_rate: float, f_low: float, f_high: float
) -> float:
    """Fraction of a segment's spectral energy inside [f_low, f_high].

    Measured from the Fourier magnitude of the (rectangular-windowed)
    segment, zero-padded for fine frequency resolution.
    """
    samples = np.asarray(samples, dtype=float)
    n_fft = max(8 * samples.size, 1024)
    spectrum = np.abs(np.fft.rfft(samples, n=n_fft)) ** 2
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    total = spectrum.sum()
    if total == 0.0:
        return 0.0
    in_band = spectrum[(freqs >= f_low) & (freqs <= f_high)].sum()
    return float(in_band / total)


def random_data_bits(n_bits: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n_bits independent +/-1 data bits."""
    return rng.choice(np.array([-1, 1], dtype=np.int64), size=n_bits)
