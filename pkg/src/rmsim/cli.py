"""Command-line entry point.

Subcommands:
    rmsim simulate born|survival|trajectory|renewal [options]
    rmsim check geometry|velocity|gue [options]
    rmsim estimate [options]
    rmsim print-defaults [scenario]

Common options: --config PATH, --seed U64, --workers N, --out DIR,
--format json|csv|both.  The RMSIM_SEED environment variable supplies the
master seed at lowest precedence (flag beats config beats environment).
Exit codes: 0 success, 2 configuration/validation error, 3 statistical
invalidation (for example too many collapse timeouts).
"""

from __future__ import annotations

import argparse
import sys

from .config import SCENARIOS, defaults_ini, load_config
from .errors import ConfigError, SimulationError
from .runner import EXIT_CONFIG, run_scenario

_CHECK_ALIASES = {
    "geometry": "geometry-check",
    "velocity": "velocity-decomposition",
    "gue": "gue-stats",
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="INI run file")
    parser.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    parser.add_argument("--workers", type=int, default=None, help="worker processes")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument(
        "--format", default=None, choices=("json", "csv", "both"), help="artifact kinds"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmsim",
        description="Random-kick Schrodinger simulator: scenario runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run a stochastic scenario")
    simulate.add_argument(
        "scenario", choices=("born", "survival", "trajectory", "renewal")
    )
    _add_common(simulate)

    check = sub.add_parser("check", help="run a deterministic verification")
    check.add_argument("target", choices=sorted(_CHECK_ALIASES))
    _add_common(check)

    estimate = sub.add_parser("estimate", help="environmental estimate report")
    _add_common(estimate)

    defaults = sub.add_parser("print-defaults", help="print default configuration")
    defaults.add_argument("scenario", nargs="?", choices=SCENARIOS)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "print-defaults":
        sys.stdout.write(defaults_ini(args.scenario))
        return 0

    if args.command == "simulate":
        scenario = args.scenario
    elif args.command == "check":
        scenario = _CHECK_ALIASES[args.target]
    else:
        scenario = "estimate"

    try:
        cfg = load_config(
            args.config,
            scenario,
            seed_flag=args.seed,
            workers_flag=args.workers,
            out_flag=args.out,
            format_flag=args.format,
        )
        code = run_scenario(cfg)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except SimulationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    sys.stdout.write(f"{scenario}: wrote {cfg.output_dir}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
