"""Monte Carlo experiment driver tying the whole pipeline together.

One fix: synthesize the four beacon bursts, push them through the
channel, estimate the four ranges by matched-filter correlation,
trilaterate, optionally fuse the ceiling-rangefinder height, and record
the errors. Sweeps and trajectories repeat that over seeded trials; a
trial's seed is derived from the master seed and the trial's indices so
results are reproducible and stable under trial-count changes.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channel import (
    ChannelModel,
    Scene,
    apply_channel,
    direct_delay,
    sample_multipath,
)
from .config import SimConfig
from .dop import DroneDomain, dop_components
from .errors import ConfigError, UltralocError
from .fusion import FusionWeights, fuse_height, inverse_variance_weights, simulate_ceiling_echo
from .ranging import estimate_range
from .solver import trilaterate
from .waveform import (
    SampledSignal,
    WaveformConfig,
    generate_tx_signal,
    random_data_bits,
    random_hop_plan,
    walsh_hadamard,
)

# Stream labels keeping seed derivations of different experiment kinds apart.
_STREAM_SIMULATE = 0
_STREAM_SWEEP = 1
_STREAM_TRAJECTORY = 2


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of a single localization fix."""

    trial_id: int
    snr_db: float | None
    true_position: np.ndarray
    est_position: np.ndarray
    err_xy: float
    err_z: float
    err_3d: float
    range_errors: np.ndarray
    peak_samples: tuple[int, int, int, int]
    failed: bool
    error: str

    CSV_FIELDS = (
        "trial_id",
        "snr_db",
        "true_x",
        "true_y",
        "true_z",
        "est_x",
        "est_y",
        "est_z",
        "err_xy",
        "err_z",
        "err_3d",
        "range_err_0",
        "range_err_1",
        "range_err_2",
        "range_err_3",
        "peak_0",
        "peak_1",
        "peak_2",
        "peak_3",
        "failed",
        "error",
    )

    def csv_row(self) -> list[str]:
        def num(x: float) -> str:
            return f"{x:.12g}"

        return [
            str(self.trial_id),
            "" if self.snr_db is None else num(self.snr_db),
            *[num(v) for v in self.true_position],
            *[num(v) for v in self.est_position],
            num(self.err_xy),
            num(self.err_z),
            num(self.err_3d),
            *[num(v) for v in self.range_errors],
            *[str(p) for p in self.peak_samples],
            "1" if self.failed else "0",
            self.error,
        ]


@dataclass(frozen=True)
class Trajectory:
    """Fix points along a flight path, pre-sampled at fix_spacing."""

    waypoints: np.ndarray
    fix_spacing: float

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.waypoints, dtype=float))
        if pts.shape[0] < 1 or pts.shape[1] != 3:
            raise ValueError("trajectory needs at least one 3-D waypoint")
        object.__setattr__(self, "waypoints", pts)


def random_position(domain: DroneDomain, rng: np.random.Generator) -> np.ndarray:
    return np.array(
        [
            rng.uniform(*domain.x_range),
            rng.uniform(*domain.y_range),
            rng.uniform(*domain.z_range),
        ]
    )


def make_trajectory(
    domain: DroneDomain,
    seed: int,
    n_waypoints: int = 8,
    fix_spacing: float = 0.25,
) -> Trajectory:
    """Seeded piecewise-linear random path resampled at fix_spacing."""
    if n_waypoints < 1:
        raise ValueError("need at least one waypoint")
    rng = np.random.default_rng([seed, _STREAM_TRAJECTORY])
    corners = np.array([random_position(domain, rng) for _ in range(max(n_waypoints, 1))])
    if corners.shape[0] == 1:
        return Trajectory(waypoints=corners, fix_spacing=fix_spacing)
    fixes = [corners[0]]
    for a, b in zip(corners[:-1], corners[1:]):
        seg = b - a
        length = float(np.linalg.norm(seg))
        if length == 0.0:
            continue
        n_steps = max(int(math.floor(length / fix_spacing)), 1)
        for k in range(1, n_steps + 1):
            fixes.append(a + seg * min(k * fix_spacing / length, 1.0))
    return Trajectory(waypoints=np.array(fixes), fix_spacing=fix_spacing)


def run_fix(config: SimConfig, true_position: np.ndarray, rng_seed) -> TrialRecord:
    """Simulate one complete localization fix; never raises on module errors."""
    true_position = np.asarray(true_position, dtype=float)
    try:
        return _run_fix_inner(config, true_position, rng_seed)
    except (UltralocError, ValueError, np.linalg.LinAlgError) as exc:
        nan3 = np.full(3, np.nan)
        return TrialRecord(
            trial_id=0,
            snr_db=config.channel.snr_db,
            true_position=true_position,
            est_position=nan3,
            err_xy=math.nan,
            err_z=math.nan,
            err_3d=math.nan,
            range_errors=np.full(4, np.nan),
            peak_samples=(-1, -1, -1, -1),
            failed=True,
            error=f"{type(exc).__name__}: {exc}",
        )


def _run_fix_inner(config: SimConfig, true_position: np.ndarray, rng_seed) -> TrialRecord:
    rng = np.random.default_rng(rng_seed)
    wf = config.waveform
    ch = config.channel
    scene = Scene(
        room_dims=config.scene.room_dims,
        beacons=config.scene.layout,
        receiver_position=true_position,
    )
    walsh = walsh_hadamard(wf.walsh_order)
    plan = random_hop_plan(
        n_symbols=wf.burst_bits,
        seed=int(rng.integers(2**31)),
        center_frequencies=wf.center_frequencies,
        channel_bandwidth=wf.channel_bandwidth,
        carrier_phase=wf.carrier_phase,
        reuse_window=wf.hop_reuse_window,
    )
    wconfigs = [
        WaveformConfig(
            sample_rate=wf.sample_rate,
            symbol_duration=wf.symbol_duration,
            data_bits=random_data_bits(wf.burst_bits, rng),
            code_row_index=i,
        )
        for i in range(4)
    ]
    tx = [generate_tx_signal(wconfigs[i], plan, walsh.row(i)) for i in range(4)]
    if ch.distance_attenuation:
        tx = [
            SampledSignal(
                samples=s.samples
                / max(direct_delay(scene, i, ch.speed_of_sound) * ch.speed_of_sound, 1.0),
                sample_rate=s.sample_rate,
            )
            for i, s in enumerate(tx)
        ]

    taps: tuple = ((), (), (), ())
    if ch.multipath:
        taps = sample_multipath(
            scene,
            rng,
            n_taps=ch.taps_per_beacon,
            excess_delay_range=(ch.excess_delay_min, ch.excess_delay_max),
            first_tap_db=ch.first_tap_db,
            decay_time=ch.decay_time,
            c=ch.speed_of_sound,
        )
    model = ChannelModel(
        taps_per_beacon=taps,
        snr_db=ch.snr_db,
        speed_of_sound=ch.speed_of_sound,
        rng_seed=int(rng.integers(2**31)),
    )
    received = apply_channel(tx, scene, model)

    estimates = [
        estimate_range(received, i, wconfigs[i], plan, walsh.row(i), ch.speed_of_sound)
        for i in range(4)
    ]
    ranges = np.array([e.distance for e in estimates])
    true_dists = np.linalg.norm(
        np.asarray(config.scene.layout.positions) - true_position[None, :], axis=1
    )
    fix = trilaterate(config.scene.layout, ranges)
    est = fix.position.copy()

    fu = config.fusion
    if fu.enabled:
        echo = simulate_ceiling_echo(
            true_height=float(true_position[2]),
            ceiling_height=config.scene.room_dims[2],
            c=ch.speed_of_sound,
            noise_std=fu.echo_noise_std,
            rng=rng,
            obstruction_prob=fu.obstruction_prob,
        )
        if fu.auto_weights:
            quant_std = ch.speed_of_sound / wf.sample_rate / math.sqrt(12.0)
            _, vdop, _ = dop_components(config.scene.layout, est[None, :])
            var_tri = (float(vdop[0]) * quant_std) ** 2 if np.isfinite(vdop[0]) else 1.0
            var_echo = (ch.speed_of_sound * fu.echo_noise_std / 2.0) ** 2
            weights = inverse_variance_weights(var_tri, var_echo)
        else:
            weights = FusionWeights(w1=fu.w1, w2=fu.w2)
        est[2] = fuse_height(est[2], echo.derived_height, weights)

    delta = est - true_position
    err_xy = float(np.hypot(delta[0], delta[1]))
    err_z = float(abs(delta[2]))
    return TrialRecord(
        trial_id=0,
        snr_db=ch.snr_db,
        true_position=true_position,
        est_position=est,
        err_xy=err_xy,
        err_z=err_z,
        err_3d=float(np.hypot(err_xy, err_z)),
        range_errors=ranges - true_dists,
        peak_samples=tuple(e.peak_sample for e in estimates),
        failed=False,
        error="",
    )


def _run_trials(
    config: SimConfig,
    tasks: list[tuple[int, np.ndarray, list[int]]],
    workers: int,
) -> list[TrialRecord]:
    """Run (trial_id, position, seed) tasks, then restore trial-id order."""

    def one(task: tuple[int, np.ndarray, list[int]]) -> TrialRecord:
        trial_id, position, seed = task
        rec = run_fix(config, position, seed)
        return replace(rec, trial_id=trial_id)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, tasks))
    else:
        records = [one(t) for t in tasks]
    records.sort(key=lambda r: r.trial_id)
    return records


def simulate(config: SimConfig, trials: int | None = None) -> list[TrialRecord]:
    """Run seeded fixes at random drone-domain positions at the config SNR."""
    n = trials if trials is not None else config.run.trials
    domain = config.drone_domain()
    tasks = []
    for t in range(n):
        seed = [config.run.seed, _STREAM_SIMULATE, t]
        pos_rng = np.random.default_rng([*seed, 999])
        tasks.append((t, random_position(domain, pos_rng), seed))
    return _run_trials(config, tasks, config.run.workers)


def sweep_snr(
    config: SimConfig,
    snr_list: tuple[float, ...] | None = None,
    trials_per_point: int | None = None,
) -> tuple[list[TrialRecord], list[dict]]:
    """Monte Carlo localization error versus SNR.

    Returns all trial records plus one aggregate row per SNR with means
    and standard deviations of the per-axis and combined errors.
    """
    snrs = snr_list if snr_list is not None else config.run.snr_list
    n = trials_per_point if trials_per_point is not None else config.run.trials
    domain = config.drone_domain()
    all_records: list[TrialRecord] = []
    table: list[dict] = []
    for s_idx, snr in enumerate(snrs):
        cfg_s = replace(config, channel=replace(config.channel, snr_db=snr))
        tasks = []
        for t in range(n):
            seed = [config.run.seed, _STREAM_SWEEP, s_idx, t]
            pos_rng = np.random.default_rng([*seed, 999])
            tasks.append((s_idx * n + t, random_position(domain, pos_rng), seed))
        records = _run_trials(cfg_s, tasks, config.run.workers)
        all_records.extend(records)
        table.append(aggregate_records(records, snr))
    return all_records, table


def aggregate_records(records: list[TrialRecord], snr_db: float | None) -> dict:
    ok = [r for r in records if not r.failed]
    row: dict = {
        "snr_db": snr_db,
        "n_trials": len(records),
        "n_failed": len(records) - len(ok),
    }
    if ok:
        dx = np.array([abs(r.est_position[0] - r.true_position[0]) for r in ok])
        dy = np.array([abs(r.est_position[1] - r.true_position[1]) for r in ok])
        for name, vals in (
            ("err_x", dx),
            ("err_y", dy),
            ("err_z", np.array([r.err_z for r in ok])),
            ("err_xy", np.array([r.err_xy for r in ok])),
            ("err_3d", np.array([r.err_3d for r in ok])),
        ):
            row[f"mean_{name}"] = float(vals.mean())
            row[f"std_{name}"] = float(vals.std())
    else:
        for name in ("err_x", "err_y", "err_z", "err_xy", "err_3d"):
            row[f"mean_{name}"] = math.nan
            row[f"std_{name}"] = math.nan
    return row


def run_trajectory(
    config: SimConfig, trajectory: Trajectory
) -> tuple[list[TrialRecord], dict]:
    """One fix per trajectory point plus a mean-error summary."""
    domain = config.drone_domain()
    for i, p in enumerate(trajectory.waypoints):
        if not domain.contains(p):
            raise ConfigError(f"trajectory waypoint {i} at {p} is outside the drone domain")
    tasks = [
        (i, p, [config.run.seed, _STREAM_TRAJECTORY, i])
        for i, p in enumerate(trajectory.waypoints)
    ]
    records = _run_trials(config, tasks, config.run.workers)
    ok = [r for r in records if not r.failed]
    summary = {
        "n_fixes": len(records),
        "n_failed": len(records) - len(ok),
        "mean_err_z": float(np.mean([r.err_z for r in ok])) if ok else math.nan,
        "mean_err_3d": float(np.mean([r.err_3d for r in ok])) if ok else math.nan,
    }
    return records, summary


def write_trials_csv(records: list[TrialRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TrialRecord.CSV_FIELDS)
        for rec in records:
            writer.writerow(rec.csv_row())


def write_sweep_csv(table: list[dict], path: str | Path) -> None:
    if not table:
        raise ValueError("empty sweep table")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(table[0].keys()))
        for row in table:
            writer.writerow(
                [f"{v:.12g}" if isinstance(v, float) else str(v) for v in row.values()]
            )


def write_summary_json(summary: dict, path: str | Path) -> None:
    def coerce(obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        raise TypeError(f"not JSON serializable: {type(obj)}")

    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=coerce)
        fh.write("\n")
