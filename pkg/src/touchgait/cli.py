"""Command-line replay harness.

Subcommands:

* ``tactile``  replay object poses through a contact model; score IoU
  fidelity when the trajectory carries reference maps.
* ``rewards``  replay logged robot states into per-tick reward breakdowns.
* ``gait``     air-time symmetry report from logged foot contacts.
* ``episode``  full synthetic pipeline: sample an episode, script a
  trajectory, run signals + observations + rewards end to end.

Exit codes: 0 success, 2 input-schema error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace as dc_replace
from pathlib import Path

import numpy as np

from . import replay
from .config import ConfigError, SchemaError, SimConfig, load_config
from .rewards import RewardBreakdown
from .signals import write_frames_csv
from .tactile import ContactModel, ascii_map


def _load(args) -> SimConfig:
    config = load_config(args.config) if args.config else SimConfig()
    if getattr(args, "model", None):
        base = config.contact_model
        config.contact_model = ContactModel(
            variant=args.model, kernel_sigma=base.kernel_sigma, threshold=base.threshold
        )
    return config


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_rewards_csv(path, breakdowns: list[RewardBreakdown], timestamps):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tick", "timestamp"] + list(RewardBreakdown.term_names()) + ["total"])
        for t, b in enumerate(breakdowns):
            writer.writerow([t, repr(float(timestamps[t]))] + [repr(v) for v in b.as_row()])


def _write_matrix_csv(path, name: str, rows: list[np.ndarray]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"{name}_{i}" for i in range(len(rows[0]))])
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def cmd_tactile(args) -> int:
    config = _load(args)
    traj = replay.read_trajectory(args.traj, (config.grid.rows, config.grid.cols))
    params = (args.radius, args.length, args.mass)
    frames, report = replay.replay_tactile(
        traj, config, seed=args.seed, augment=args.augment, object_params=params
    )
    out = _out_dir(args)
    write_frames_csv(out / "sim_tactile.csv", frames)
    if args.ascii:
        for frame in frames:
            print(f"t={frame.timestamp:.3f}")
            print(ascii_map(frame.binary))
            print()
    if report is not None:
        with open(out / "fidelity.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["tick", "iou", "sim_active", "ref_active"])
            for t in range(traj.n_ticks):
                writer.writerow(
                    [t, repr(float(report.per_frame_iou[t])),
                     int(report.sim_active_counts[t]), int(report.ref_active_counts[t])]
                )
        (out / "fidelity.json").write_text(
            json.dumps({"mean_iou": report.mean_iou, "model": config.contact_model.variant},
                       indent=2) + "\n",
            encoding="utf-8",
        )
        print(f"mean IoU ({config.contact_model.variant}): {report.mean_iou:.4f}")
    print(f"wrote {traj.n_ticks} frames to {out}")
    return 0


def cmd_rewards(args) -> int:
    config = _load(args)
    traj = replay.read_trajectory(args.traj, (config.grid.rows, config.grid.cols))
    rows, term_tick, reason = replay.replay_rewards(traj, config, seed=args.seed)
    out = _out_dir(args)
    _write_rewards_csv(out / "rewards.csv", rows, traj.timestamps)
    summary = {
        "ticks": len(rows),
        "terminated_at": term_tick,
        "reason": reason,
        "mean_total": float(np.mean([b.total for b in rows])),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(f"replayed {len(rows)} ticks"
          + (f", terminated at {term_tick} ({reason})" if term_tick is not None else ""))
    return 0


def cmd_gait(args) -> int:
    config = _load(args)
    traj = replay.read_trajectory(args.traj, (config.grid.rows, config.grid.cols))
    if not traj.has_contacts:
        raise SchemaError(f"{args.traj}: gait analysis needs the contact column group")
    dt = float(np.mean(np.diff(traj.timestamps)))
    report = replay.gait_metrics(traj.contact_matrix(), dt)
    out = _out_dir(args)
    (out / "gait_report.json").write_text(
        json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    with open(out / "air_times.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pair", "cycle", "air_time"])
        for pair in (0, 1):
            for i, value in enumerate(report.air_times[pair]):
                writer.writerow([pair, i, repr(value)])
    if report.insufficient_data:
        print("insufficient data: fewer than two complete swing cycles")
    else:
        print(f"symmetry ratio {report.symmetry_ratio:.4f}, "
              f"stepping frequency {report.stepping_freq:.3f} Hz")
    return 0


def cmd_episode(args) -> int:
    config = _load(args)
    columns, meta = replay.synth_trajectory(config, args.seed, args.ticks)
    out = _out_dir(args)
    grid_shape = (config.grid.rows, config.grid.cols)
    replay.write_trajectory(out / "trajectory.csv", columns, grid_shape)

    traj = replay.Trajectory(columns=columns, grid_shape=grid_shape)
    start = time.perf_counter()
    results, gait_report = replay.run_episode(
        traj, config, meta["engine_seed"], (meta["radius"], meta["length"], meta["mass"])
    )
    elapsed = time.perf_counter() - start

    _write_rewards_csv(out / "rewards.csv", [r.breakdown for r in results], traj.timestamps)
    (out / "gait_report.json").write_text(
        json.dumps(gait_report.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    if args.dump_frames:
        write_frames_csv(out / "tactile.csv", [r.frame for r in results])
        _write_matrix_csv(out / "observations.csv", "obs", [r.observation for r in results])
        _write_matrix_csv(out / "windows.csv", "w", [r.window for r in results])
    meta.update(
        {
            "ticks_run": len(results),
            "replay_seconds": elapsed,
            "terminated": results[-1].terminated if results else False,
            "reason": results[-1].reason if results else None,
        }
    )
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    print(f"episode: {len(results)} ticks in {elapsed:.3f}s "
          f"({1e6 * elapsed / max(len(results), 1):.0f} us/tick)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="touchgait", description="tactile transport replay harness"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_traj=True):
        if needs_traj:
            p.add_argument("--traj", required=True, help="trajectory CSV")
        p.add_argument("--config", help="shared JSON config (defaults when omitted)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("tactile", help="replay poses through a contact model")
    common(p)
    p.add_argument("--model", choices=["intersect", "filtered", "expanded"])
    p.add_argument("--augment", action="store_true",
                   help="apply flip noise and latency like training")
    p.add_argument("--ascii", action="store_true", help="print maps as text")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--length", type=float, default=0.3)
    p.add_argument("--mass", type=float, default=1.0)
    p.set_defaults(func=cmd_tactile)

    p = sub.add_parser("rewards", help="reward breakdowns from a state log")
    common(p)
    p.set_defaults(func=cmd_rewards)

    p = sub.add_parser("gait", help="air-time symmetry report")
    common(p)
    p.set_defaults(func=cmd_gait)

    p = sub.add_parser("episode", help="synthetic end-to-end episode")
    common(p, needs_traj=False)
    p.add_argument("--ticks", type=int, default=400)
    p.add_argument("--dump-frames", action="store_true",
                   help="also dump tactile frames and observations")
    p.set_defaults(func=cmd_episode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
