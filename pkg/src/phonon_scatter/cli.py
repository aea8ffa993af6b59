"""Command-line front end: `phonon-scatter <command> --config <file> ...`.

Exit codes: 0 when every check passes, 1 on check failures, 2 on config
rejection (the failing precondition is printed), 3 when a validity guard
flagged the run.  The worker-pool size resolves as the
PHONON_SCATTER_THREADS environment variable, then --threads, then the
config value.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import ConfigError, InvalidRunError
from .harness import EXPERIMENTS, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonon-scatter",
        description="Reproducible experiments on the thermostatted harmonic chain",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name.replace("_", "-"),
                           help=f"run the {name} experiment")
        p.add_argument("--config", required=True, type=Path,
                       help="JSON config file")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: ./out/<command>)")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker pool size")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command.replace("-", "_")
    try:
        config = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config rejected: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    config["experiment"] = command
    if args.seed is not None:
        config["seed"] = args.seed
    env_threads = os.environ.get("PHONON_SCATTER_THREADS")
    if env_threads is not None:
        config["threads"] = int(env_threads)
    elif args.threads is not None:
        config["threads"] = args.threads
    outdir = args.out if args.out is not None else Path("out") / command
    try:
        report = run_experiment(config, outdir)
    except ConfigError as exc:
        print(f"config rejected: {exc}", file=sys.stderr)
        return 2
    except InvalidRunError as exc:
        print(f"invalid run: {exc}", file=sys.stderr)
        return 3
    for check in report.checks:
        flag = "PASS" if check.passed else "FAIL"
        print(f"[{flag}] {check.name}: measured={check.measured:.6g} "
              f"target={check.target:.6g} tol={check.tolerance:.6g}")
    for note in report.notes:
        print(f"note: {note}")
    print(f"{report.experiment}: {'PASS' if report.passed else 'FAIL'} "
          f"({report.wall_seconds:.1f}s); outputs in {outdir}")
    if report.invalid:
        return 3
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
