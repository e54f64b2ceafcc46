"""Command-line front end.

Subcommands: ``run`` (one hierarchical episode), ``batch`` (seeded sweeps per
dynamic mode), ``viewpoints`` (emit the camera lattice), ``visibility-check``
(one camera / one attitude mask statistics).  The default output directory
comes from ``ORBITINSPECT_OUTPUT_DIR`` when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .attitude import DynamicMode, propagate_attitude
from .envs import EnvConfig, InspectionWorld
from .geometry import fibonacci_viewpoints, fov_filter, hidden_point_removal, transform_cloud
from .harness import PolicySpec, export, run_batch, run_episode
from .mpc import ControllerConfig

OUTPUT_DIR_ENV = "ORBITINSPECT_OUTPUT_DIR"


def _load_config(args) -> EnvConfig:
    cfg = EnvConfig.from_file(args.config) if args.config else EnvConfig()
    if getattr(args, "mode", None):
        cfg = cfg.with_overrides(dynamic_mode=args.mode)
    if getattr(args, "env_seed", None) is not None:
        cfg = cfg.with_overrides(seed=args.env_seed)
    return cfg


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUTPUT_DIR_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _policy_spec(args) -> PolicySpec:
    weights = tuple(args.weights) if args.weights else None
    return PolicySpec(kind=args.policy, epsilon=args.epsilon, weight_paths=weights)


def _add_common_run_args(parser):
    parser.add_argument("--config", help="env config file (YAML or JSON)")
    parser.add_argument("--mode", choices=[m.value for m in DynamicMode],
                        help="override the config's dynamic mode")
    parser.add_argument("--policy", default="greedy",
                        choices=["random", "park", "greedy", "recurrent-q"])
    parser.add_argument("--weights", nargs=3, metavar="W",
                        help="three weight containers for recurrent-q")
    parser.add_argument("--epsilon", type=float, default=0.0,
                        help="evaluation-time exploration rate")
    parser.add_argument("--threshold", type=float, default=0.83,
                        help="rollout coverage threshold")
    parser.add_argument("--max-actions", type=int, default=100,
                        help="high-level action budget per agent")
    parser.add_argument("--out", help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")


def cmd_run(args) -> int:
    cfg = _load_config(args)
    ctrl = ControllerConfig()
    record, metrics = run_episode(cfg, ctrl, _policy_spec(args), args.seed,
                                  rollout_threshold=args.threshold,
                                  max_actions_per_agent=args.max_actions)
    out = _out_dir(args)
    record.to_jsonl(out / "episode.jsonl")
    export(record, "csv", out / "series.csv")
    with open(out / "metrics.json", "w") as fh:
        json.dump(metrics.to_dict(), fh, indent=2)
    print(f"coverage {metrics.inspection_pct:.2f}% in {metrics.sim_time:.0f} s "
          f"({metrics.done_reason}); total delta-v {metrics.delta_v_total:.3f} m/s")
    print(f"wrote {out / 'episode.jsonl'}, {out / 'series.csv'}, {out / 'metrics.json'}")
    return 0


def cmd_batch(args) -> int:
    cfg = _load_config(args)
    ctrl = ControllerConfig()
    seeds = args.seeds if args.seeds else [args.seed + k for k in range(args.runs)]
    report = run_batch(cfg, ctrl, _policy_spec(args), args.modes, args.runs,
                       seeds=seeds, rollout_threshold=args.threshold,
                       max_actions_per_agent=args.max_actions)
    out = _out_dir(args)
    export(report, "csv", out / "report.csv")
    export(report, "json-lines", out / "report.jsonl")
    for mode, entry in report.per_mode.items():
        m = entry["metrics"]
        if m:
            print(f"{mode}: inspection {m['inspection_pct'][0]:.2f}% "
                  f"time {m['time_s'][0]:.0f} s dV {m['delta_v_total'][0]:.3f} m/s "
                  f"({entry['runs']} runs)")
        else:
            print(f"{mode}: all runs failed ({entry['errors']})")
    print(f"wrote {out / 'report.csv'}, {out / 'report.jsonl'}")
    return 0


def cmd_viewpoints(args) -> int:
    lattice = fibonacci_viewpoints(args.count, args.radius)
    rows = [{"index": i, "x": p[0], "y": p[1], "z": p[2]}
            for i, p in enumerate(lattice.positions)]
    if args.out:
        path = Path(args.out)
        with open(path, "w") as fh:
            if args.format == "csv":
                fh.write("index,x,y,z\n")
                for r in rows:
                    fh.write(f"{r['index']},{r['x']!r},{r['y']!r},{r['z']!r}\n")
            else:
                for r in rows:
                    fh.write(json.dumps(r) + "\n")
        print(f"wrote {path}")
    else:
        for r in rows:
            print(json.dumps(r))
    return 0


def cmd_visibility_check(args) -> int:
    cfg = _load_config(args)
    world = InspectionWorld(cfg)
    attitude = propagate_attitude(world.initial_attitude(), args.time, world.inertia)
    q_bf_hill, _ = world.attitude_products(attitude, args.time)
    camera_pos = world.viewpoints.positions[args.viewpoint]
    pts = transform_cloud(world.cloud, q_bf_hill)
    fov = fov_filter(pts, camera_pos, world.camera)
    hpr = hidden_point_removal(pts, camera_pos, world.camera)
    mask = fov & hpr
    stats = {
        "viewpoint": args.viewpoint,
        "time": args.time,
        "points": world.n_points,
        "visible": int(mask.sum()),
        "visible_fraction": float(mask.mean()),
        "fov_only": int(fov.sum()),
        "hpr_only": int(hpr.sum()),
    }
    print(json.dumps(stats, indent=2))
    if args.out:
        np.savetxt(args.out, mask.astype(int), fmt="%d")
        print(f"wrote mask to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitinspect",
        description="Multi-agent on-orbit inspection simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one hierarchical episode")
    _add_common_run_args(p_run)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--env-seed", type=int, help="override config seed field")
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="seeded episode sweeps per mode")
    _add_common_run_args(p_batch)
    p_batch.add_argument("--modes", nargs="+", default=["static-hill"],
                         choices=[m.value for m in DynamicMode])
    p_batch.add_argument("--runs", type=int, default=10)
    p_batch.add_argument("--seed", type=int, default=0, help="base seed")
    p_batch.add_argument("--seeds", nargs="+", type=int,
                         help="explicit seed list (overrides --seed)")
    p_batch.add_argument("--env-seed", type=int, help="override config seed field")
    p_batch.set_defaults(func=cmd_batch)

    p_vp = sub.add_parser("viewpoints", help="emit the viewpoint lattice")
    p_vp.add_argument("--count", type=int, default=20)
    p_vp.add_argument("--radius", type=float, default=200.0)
    p_vp.add_argument("--format", choices=["csv", "json-lines"], default="json-lines")
    p_vp.add_argument("--out")
    p_vp.set_defaults(func=cmd_viewpoints)

    p_vis = sub.add_parser("visibility-check",
                           help="mask statistics for one camera and attitude")
    p_vis.add_argument("--config", help="env config file (YAML or JSON)")
    p_vis.add_argument("--mode", choices=[m.value for m in DynamicMode])
    p_vis.add_argument("--viewpoint", type=int, default=0)
    p_vis.add_argument("--time", type=float, default=0.0,
                       help="target attitude propagated to this time")
    p_vis.add_argument("--out", help="write the 0/1 mask vector to this file")
    p_vis.set_defaults(func=cmd_visibility_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
