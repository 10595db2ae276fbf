"""Command-line entry point for running experiments to CSV.

Exit codes: 0 success, 1 configuration error (bad arguments, bad config
file contents, bad sweep), 2 I/O error (unreadable config, unwritable
output path).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import load_config, reference_config
from .errors import ConfigError
from .harness import SWEEP_NAMES, preset_spec, run_experiment

EXPERIMENTS = ("fig2a", "fig2b", "fig2c", "fig3", "table1", "custom")

_INT_SWEEPS = ("L", "S")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; remap to the
    # configuration-error path (exit 1) instead
    def error(self, message):
        raise ConfigError(message)


def _parse_sweep(text: str) -> tuple:
    name, sep, values = text.partition("=")
    if not sep or not values:
        raise ConfigError(f"--sweep expects name=v1,v2,..., got {text!r}")
    if name not in SWEEP_NAMES:
        raise ConfigError(f"unknown sweep variable {name!r}")
    try:
        parsed = [float(v) for v in values.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad sweep value in {text!r}: {exc}") from exc
    if name in _INT_SWEEPS:
        parsed = [int(round(v)) for v in parsed]
    return name, tuple(parsed)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="irsce", description="IRS channel-estimation Monte-Carlo runner")
    parser.add_argument("--config", help="JSON file of system-configuration overrides")
    parser.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=12345)
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--sweep", help="name=v1,v2,... (required for custom)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.config) if args.config else reference_config()
        sweep = _parse_sweep(args.sweep) if args.sweep else None
        spec = preset_spec(args.experiment, config, args.trials, args.seed,
                           out_path=args.out, sweep_override=sweep)
        run_experiment(spec)
    except ConfigError as exc:
        print(f"irsce: configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"irsce: i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
