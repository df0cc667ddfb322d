"""Command line entry points: simulate, sweep, analyze, oracle.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytic, io, kernels, metrics, svg
from .config import ConfigError, RunConfig, load_config
from .core import OpinionState
from .models import run_simulation
from .sweep import AGGREGATE_FIELDS, SweepError, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _out_dir(cfg: RunConfig, override: Optional[str]) -> Path:
    return Path(override if override else cfg.output.dir)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    spec = cfg.model_spec()
    cfg.require("population")
    group = cfg.group()
    horizon = cfg.horizon()
    if cfg.simulate.snapshot_times is not None:
        times = cfg.simulate.snapshot_times
    else:
        times = range(0, horizon + 1, cfg.simulate.snapshot_every)
    traj = run_simulation(
        spec, OpinionState(cfg.population.opinions(), 0), group,
        stop=cfg.stop_rule(), horizon=horizon, snapshot_times=times,
        rng=cfg.rng() if spec.kind.stochastic else None,
    )
    out = _out_dir(cfg, args.out)
    m = cfg.metrics
    summary = {
        "model": spec.kind.value,
        "epsilon": spec.epsilon,
        "stop_time": traj.stop_time,
        "stop_reason": traj.stop_reason.value,
        "final": metrics.summarize(traj.final.opinions, spec.epsilon, m.delta, m.h, m.alpha, m.gap_tolerance),
    }
    td = group.t_delta
    if group.k > 0 and any(s.time == td for s in traj.snapshots):
        summary["t_delta"] = metrics.summarize(traj.at(td).opinions, spec.epsilon, m.delta, m.h,
                                               m.alpha, m.gap_tolerance)
    written = [
        io.write_jsonl(out / "trajectory.jsonl", io.trajectory_records(traj)),
        io.write_json(out / "summary.json", summary),
    ]
    if cfg.output.svg or args.svg:
        ops = np.array([s.opinions for s in traj.snapshots])
        manip = traj.manipulator_opinions if group.k > 0 else []
        written.append(io.write_svg(out / "trajectory.svg", svg.trajectory_svg(
            [s.time for s in traj.snapshots], ops, manip,
            f"{spec.kind.value}, eps={spec.epsilon}, K={group.k}, t_delta={td}")))
    fin = summary["final"]
    print(f"{spec.kind.value}: stopped at t={traj.stop_time} ({traj.stop_reason.value}); "
          f"mean={fin['mean']:.6g} std={fin['std']:.6g} clusters={fin['n_clusters']} "
          f"center={fin['center']:.6g} amplitude={fin['amplitude']:.6g} primary={fin['n_primary']}")
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    grid = cfg.grid()
    exp = cfg.experiment()
    workers = args.workers or cfg.sweep.workers
    matrix = run_sweep(grid, exp, parallelism=workers)
    out = _out_dir(cfg, args.out)
    written = io.write_sweep(matrix, exp.snapshots, out / "sweep.csv", out / "weights_hist.csv")
    if cfg.output.svg or args.svg:
        for label in exp.snapshots:
            for name in AGGREGATE_FIELDS:
                vals = np.array([[c.aggregates[label][name] for c in row] for row in matrix])
                written.append(io.write_svg(out / f"heatmap_{name}_{label}.svg", svg.heatmap_svg(
                    vals, grid.k_values, grid.tdelta_values, f"{name} ({label})")))
    print(f"{len(grid.k_values)}x{len(grid.tdelta_values)} cells x {grid.replicates} replicates "
          f"[{kernels.BACKEND} kernels]")
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    eps = args.epsilon
    m = None
    if args.config:
        cfg = load_config(args.config)
        m = cfg.metrics
        if eps is None and cfg.model is not None:
            eps = cfg.model.epsilon
    if eps is None:
        raise ConfigError("analyze needs --epsilon or a --config with model.epsilon")
    delta = args.delta if args.delta is not None else (m.delta if m else 0.5)
    h = args.h if args.h is not None else (m.h if m else metrics.DEFAULT_H)
    alpha = args.alpha if args.alpha is not None else (m.alpha if m else metrics.DEFAULT_ALPHA)
    gap = args.gap_tolerance if args.gap_tolerance is not None else (
        m.gap_tolerance if m else metrics.DEFAULT_GAP_TOLERANCE)
    records = io.read_jsonl(args.snapshots)
    if not records:
        raise ConfigError(f"{args.snapshots}: no records")
    if args.time is not None:
        records = [r for r in records if r.get("t") == args.time]
        if not records:
            raise ConfigError(f"{args.snapshots}: no record at t={args.time}")
    elif not args.all:
        records = records[-1:]
    results = []
    for r in records:
        s = metrics.summarize(r["opinions"], eps, delta, h, alpha, gap)
        s["t"] = r.get("t")
        results.append(s)
    text = json.dumps(results if args.all or len(results) > 1 else results[0], indent=2, sort_keys=True)
    if args.out:
        io.write_json(args.out, json.loads(text))
        print(f"wrote {args.out}")
    else:
        print(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = load_config(args.config)
    sys_ = cfg.two_group()
    o = cfg.oracle
    bound = analytic.influence_bound(sys_.k_manip, sys_.n_normal, sys_.epsilon)
    forever = analytic.holds_forever(sys_)
    detach = analytic.detachment_time(sys_, o.horizon) if sys_.valid_at_start else None
    # the closed form is only valid while the groups stay in contact
    steps = o.steps if detach is None else min(o.steps, detach - 1)
    sim = analytic.simulate_gap(sys_, steps)
    closed = analytic.gap_closed_form(sys_, np.arange(steps + 1))
    deviation = float(np.max(np.abs(sim - closed)))
    result = {
        "influence_bound": bound,
        "holds_forever": forever,
        "detachment_time": detach,
        "compared_steps": steps,
        "max_gap_deviation": deviation,
    }
    print(json.dumps(result, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="overton", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one simulation")
    s.add_argument("config")
    s.add_argument("-o", "--out", help="output directory (overrides output.dir)")
    s.add_argument("--svg", action="store_true", help="also write trajectory.svg")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="run a (K, t_delta) sweep")
    s.add_argument("config")
    s.add_argument("-o", "--out", help="output directory (overrides output.dir)")
    s.add_argument("-j", "--workers", type=int, help="worker processes (default: $OVERTON_WORKERS or CPU count)")
    s.add_argument("--svg", action="store_true", help="also write heatmaps")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("analyze", help="recompute metrics on saved snapshots")
    s.add_argument("snapshots", help="trajectory JSONL file")
    s.add_argument("--config", help="take epsilon and metric parameters from a config")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--delta", type=float)
    s.add_argument("--h", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--gap-tolerance", type=float)
    s.add_argument("--time", type=int, help="analyze the record at this t (default: last)")
    s.add_argument("--all", action="store_true", help="analyze every record")
    s.add_argument("-o", "--out", help="write JSON here instead of stdout")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("oracle", help="two-group HK closed form vs simulation")
    s.add_argument("config")
    s.set_defaults(func=cmd_oracle)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SweepError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, ArithmeticError, AssertionError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
