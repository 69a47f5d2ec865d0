"""Command-line experiment driver.

Usage:
    elastic-uc --experiment convergence --config configs/convergence.ini \
               --out results/conv --seed 0 --threads 1 [--set section.key=value]

Exit code 0 on success, 2 on configuration or invariant-gate failures.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config, override_config
from .experiments import RUNNERS, ExperimentGateError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="elastic-uc",
        description="Stabilized-FEM unique continuation experiments on the unit square",
    )
    parser.add_argument("--experiment", required=True, choices=sorted(RUNNERS))
    parser.add_argument("--config", required=True, help="INI config file")
    parser.add_argument("--out", required=True, help="output directory for CSV/plots")
    parser.add_argument("--seed", required=True, type=int, help="noise / estimator seed")
    parser.add_argument(
        "--threads", required=True, type=int,
        help="thread budget (assembly and solves run serially; must be >= 1)",
    )
    parser.add_argument(
        "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override a config entry",
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ValueError("--threads must be >= 1")
        config = load_config(args.config, args.set)
        config = override_config(config, experiment=args.experiment, seed=args.seed)
        RUNNERS[config.experiment](config, args.out)
    except (ValueError, ExperimentGateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
