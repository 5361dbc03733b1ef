"""Command line front end.

Subcommands:
  simulate        one simulation run; prints metrics, optionally dumps a
                  JSON trace of the final DAG with --out
  fairness-grid   two-miner surplus sweep over (k, q0, h1, q1)
  efficiency-q    throughput sweep over (k, q) with n equal miners
  efficiency-n    throughput sweep over (k, n) with h = q = 1/n

Every subcommand takes --config pointing at a JSON file; command line
flags override the matching config fields.
"""

import argparse
import json
import math
import sys

from .engine import ConfigError
from .experiments import (
    efficiency_sweep_n,
    efficiency_sweep_q,
    emit,
    emit_trace,
    fairness_grid,
    load_config,
    single_run,
)


def _parse_k(text):
    if text == "inf":
        return math.inf
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer or 'inf', got {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("k must be >= 1")
    return k


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dagledger",
        description="simulate DAG ledgers under partial information and sweep their parameters",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "run one simulation and print its metrics",
        "fairness-grid": "sweep (k, q0, h1, q1) and record miner 1's reward surplus",
        "efficiency-q": "sweep (k, q) and record throughput metrics",
        "efficiency-n": "sweep (k, n) with h = q = 1/n",
    }
    for name in ("simulate", "fairness-grid", "efficiency-q", "efficiency-n"):
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--trials", type=int, help="trials per grid point")
        p.add_argument("--turns", type=int, help="turns per run")
        p.add_argument("--k", type=_parse_k, help="pointer budget, an integer or 'inf'")
        p.add_argument("--alpha", type=float, help="depth/weight mix in [0, 1]")
        p.add_argument("--eta", type=int, help="max regular transactions per block")
        p.add_argument("--lambda", dest="lam", type=int, help="regular transactions per turn")
        p.add_argument("--gamma", type=float, help="mean dependency count")
        p.add_argument("--out", help="output path (extension picked by --format)")
        p.add_argument("--format", choices=("csv", "json", "both"), help="output format")
        p.add_argument("--dump-trials", action="store_true", default=None,
                       help="include per-trial metric values in JSON output")
        p.add_argument("--pgm", action="store_true", default=None,
                       help="also write surplus heatmaps as binary PGM (fairness grid)")
        p.add_argument("--workers", type=int, help="parallel worker processes")
    return parser


_SWEEPS = {
    "fairness-grid": fairness_grid,
    "efficiency-q": efficiency_sweep_q,
    "efficiency-n": efficiency_sweep_n,
}


def _apply_overrides(config, args):
    if args.seed is not None:
        config.master_seed = args.seed
    if args.trials is not None:
        config.trials = args.trials
    if args.turns is not None:
        config.turns = args.turns
    if args.k is not None:
        config.k = args.k
        config.k_values = [args.k]
    if args.alpha is not None:
        config.alpha = args.alpha
    if args.eta is not None:
        config.eta = args.eta
    if args.lam is not None:
        config.lam = args.lam
    if args.gamma is not None:
        config.gamma = args.gamma
    if args.out is not None:
        config.out = args.out
    if args.format is not None:
        config.format = args.format
    if args.dump_trials is not None:
        config.dump_trials = args.dump_trials
        if config.format == "csv":
            config.format = "both"
    if args.pgm is not None:
        config.pgm = args.pgm
    if args.workers is not None:
        config.workers = args.workers
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        expected = "single-run" if args.command == "simulate" else args.command
        if config.experiment != expected:
            raise ConfigError(
                f"config is for experiment {config.experiment!r}, "
                f"but the command line asked for {expected!r}"
            )
        config = _apply_overrides(config, args)
        if args.command == "simulate":
            state, m = single_run(config)
            summary = {
                "turns": state.params.horizon,
                "k": "inf" if state.params.k == math.inf else int(state.params.k),
                "pow_efficiency": m.pow_efficiency,
                "orphan_rate": m.orphan_rate,
                "lag": m.lag,
                "shares": list(m.shares),
                "surplus": list(m.surplus),
            }
            print(json.dumps(summary, indent=2))
            if config.out:
                path = emit_trace(state, config.out)
                print(f"wrote trace to {path}", file=sys.stderr)
        else:
            records = _SWEEPS[args.command](config)
            for path in emit(records, config):
                print(f"wrote {path}", file=sys.stderr)
    except (ConfigError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
