"""Command-line entry point.

Subcommands:
  simulate    seeded fixes at random positions, trials CSV + JSON summary
  sweep       localization error vs SNR, per-SNR aggregate CSV
  trajectory  fixes along a random flight path
  optimize    evolutionary beacon-placement search
  dopmap      HDOP/VDOP/GDOP lattice over the drone domain as CSV
  rangetest   ranging-only diagnostics (per-beacon range errors)
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import harness
from .config import SimConfig, default_config, load_config, resolve_layout
from .dop import dop_components
from .errors import UltralocError
from .placement import optimize as run_placement


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ultraloc",
        description="Ultrasonic FH-CDMA indoor localization simulation lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("simulate", "run seeded fixes at random drone positions"),
        ("sweep", "sweep localization error over SNR values"),
        ("trajectory", "localize along a random piecewise-linear path"),
        ("optimize", "search for a beacon placement minimizing average VDOP"),
        ("dopmap", "emit the DOP lattice for a layout"),
        ("rangetest", "per-beacon ranging diagnostics"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=str, default=None, help="config file path")
        p.add_argument("--seed", type=int, default=None, help="master RNG seed")
        p.add_argument("--out", type=str, default=".", help="output directory")
        p.add_argument("--trials", type=int, default=None, help="trial count override")
        p.add_argument(
            "--layout",
            type=str,
            default=None,
            help="'original', 'optimized', or a coordinate file",
        )
    return parser


def _load(args: argparse.Namespace) -> SimConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg = replace(cfg, run=replace(cfg.run, seed=args.seed))
    if args.trials is not None:
        cfg = replace(cfg, run=replace(cfg.run, trials=args.trials))
    if args.layout is not None:
        cfg = replace(
            cfg,
            scene=replace(
                cfg.scene, layout_name=args.layout, layout=resolve_layout(args.layout)
            ),
        )
    return cfg


def _outdir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    records = harness.simulate(cfg)
    harness.write_trials_csv(records, out / "trials.csv")
    summary = harness.aggregate_records(records, cfg.channel.snr_db)
    summary["layout"] = cfg.scene.layout_name
    summary["seed"] = cfg.run.seed
    harness.write_summary_json(summary, out / "summary.json")
    print(f"simulate: {len(records)} fixes -> {out/'trials.csv'}")
    print(
        f"mean err_3d = {summary['mean_err_3d']:.6f} m "
        f"({summary['n_failed']} failed trials)"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    records, table = harness.sweep_snr(cfg)
    harness.write_trials_csv(records, out / "trials.csv")
    harness.write_sweep_csv(table, out / "sweep.csv")
    harness.write_summary_json({"rows": table, "seed": cfg.run.seed}, out / "summary.json")
    print(f"sweep: {len(table)} SNR points x {cfg.run.trials} trials -> {out/'sweep.csv'}")
    for row in table:
        print(
            f"  snr={row['snr_db']} dB: mean err_xy={row['mean_err_xy']:.6f} m, "
            f"mean err_z={row['mean_err_z']:.6f} m"
        )
    return 0


def _cmd_trajectory(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    traj = harness.make_trajectory(
        cfg.drone_domain(),
        seed=cfg.run.seed,
        n_waypoints=cfg.run.trajectory_waypoints,
        fix_spacing=cfg.run.fix_spacing,
    )
    records, summary = harness.run_trajectory(cfg, traj)
    harness.write_trials_csv(records, out / "trajectory.csv")
    summary["layout"] = cfg.scene.layout_name
    harness.write_summary_json(summary, out / "summary.json")
    print(
        f"trajectory: {summary['n_fixes']} fixes, mean err_z={summary['mean_err_z']:.6f} m, "
        f"mean err_3d={summary['mean_err_3d']:.6f} m"
    )
    return 0


def _cmd_optimize(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    result = run_placement(cfg.placement_problem())
    record = {
        "beacons": result.layout.positions.tolist(),
        "vdop_avg": result.vdop_avg,
        "hdop_avg": result.hdop_avg,
        "iterations": result.iterations,
        "restarts": result.restarts,
        "feasible": result.feasible,
        "seed": cfg.run.seed,
    }
    harness.write_summary_json(record, out / "placement.json")
    with open(out / "history.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "best_fitness"])
        for i, f in enumerate(result.history):
            writer.writerow([i, f"{f:.12g}"])
    print(
        f"optimize: feasible={result.feasible} vdop_avg={result.vdop_avg:.4f} "
        f"hdop_avg={result.hdop_avg:.4f} after {result.restarts} restarts"
    )
    for b in result.layout.positions:
        print(f"  beacon at ({b[0]:.2f}, {b[1]:.2f}, {b[2]:.2f})")
    return 0


def _cmd_dopmap(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    points = cfg.drone_domain().points()
    hdop, vdop, degenerate = dop_components(cfg.scene.layout, points)
    gdop = np.sqrt(hdop**2 + vdop**2)
    with open(out / "dopmap.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "z", "hdop", "vdop", "gdop"])
        for p, h, v, g, bad in zip(points, hdop, vdop, gdop, degenerate):
            if bad:
                writer.writerow([f"{p[0]:.12g}", f"{p[1]:.12g}", f"{p[2]:.12g}", "nan", "nan", "nan"])
            else:
                writer.writerow(
                    [f"{p[0]:.12g}", f"{p[1]:.12g}", f"{p[2]:.12g}", f"{h:.12g}", f"{v:.12g}", f"{g:.12g}"]
                )
    print(f"dopmap: {points.shape[0]} lattice points -> {out/'dopmap.csv'}")
    return 0


def _cmd_rangetest(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    records = harness.simulate(cfg)
    with open(out / "rangetest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial_id", "beacon", "range_error", "peak_sample", "failed"])
        for rec in records:
            for b in range(4):
                writer.writerow(
                    [
                        rec.trial_id,
                        b,
                        f"{rec.range_errors[b]:.12g}",
                        rec.peak_samples[b],
                        "1" if rec.failed else "0",
                    ]
                )
    ok = [r for r in records if not r.failed]
    if ok:
        errs = np.abs(np.array([r.range_errors for r in ok]))
        print(
            f"rangetest: {len(ok)} fixes, mean |range error| per beacon = "
            + ", ".join(f"{e*1000:.3f} mm" for e in errs.mean(axis=0))
        )
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "trajectory": _cmd_trajectory,
    "optimize": _cmd_optimize,
    "dopmap": _cmd_dopmap,
    "rangetest": _cmd_rangetest,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UltralocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
