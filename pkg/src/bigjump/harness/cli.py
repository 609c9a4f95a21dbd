"""Command-line interface.

Subcommands: thm1, thm2, prop1, gw-verify, calibrate.  Every subcommand
takes --config PATH (line-oriented key=value text) plus flag overrides and
writes the report to --out in --format (csv or jsonl).

Exit codes: 0 success, 1 configuration error, 2 runtime failure,
3 an acceptance assertion embedded in the experiment failed.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from typing import List, Optional

from ..walk import IntegrityError
from .config import ConfigError, load_config
from .experiments import run_experiment

__all__ = ["cli_main", "main"]

_SUBCOMMANDS = {"thm1": "thm1", "thm2": "thm2", "prop1": "prop1",
                "gw-verify": "gw_verify", "calibrate": "calibrate"}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="bigjump", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, add_help=True)
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument("--replicas", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--out", default=None, help="report output path")
        p.add_argument("--format", dest="fmt", choices=("csv", "jsonl"),
                       default=None)
        p.add_argument("--set", dest="assignments", action="append", default=[],
                       metavar="KEY=VALUE", help="override any config key")
        if name == "thm2":
            p.add_argument("--x-min", type=float, default=None)
            p.add_argument("--x-max", type=float, default=None)
            p.add_argument("--x-points", type=int, default=None)
        if name in ("thm1", "gw-verify"):
            p.add_argument("--sizes", default=None,
                           help="comma-separated size grid")
        if name == "gw-verify":
            p.add_argument("--k", type=int, default=None,
                           help="spine length for the Geiger check")
    return parser


def _overrides_from_args(args) -> dict:
    overrides = {}
    for assignment in args.assignments:
        if "=" not in assignment:
            raise ConfigError(f"--set expects KEY=VALUE, got {assignment!r}")
        key, value = assignment.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.seed is not None:
        overrides["base_seed"] = str(args.seed)
    if args.replicas is not None:
        overrides["replicas"] = str(args.replicas)
    if args.threads is not None:
        overrides["threads"] = str(args.threads)
    if args.out is not None:
        overrides["out"] = args.out
    if args.fmt is not None:
        overrides["format"] = args.fmt
    if getattr(args, "sizes", None) is not None:
        overrides["sizes"] = args.sizes
    if getattr(args, "k", None) is not None:
        overrides["k"] = str(args.k)
    x_min = getattr(args, "x_min", None)
    x_max = getattr(args, "x_max", None)
    x_points = getattr(args, "x_points", None)
    if x_min is not None or x_max is not None or x_points is not None:
        lo = x_min if x_min is not None else 5.0
        hi = x_max if x_max is not None else 30.0
        pts = x_points if x_points is not None else 7
        if not (0 < lo < hi) or pts < 2:
            raise ConfigError("need 0 < x-min < x-max and x-points >= 2")
        import numpy as np
        grid = np.geomspace(lo, hi, pts)
        overrides["x_grid"] = ",".join(f"{v:.6g}" for v in grid)
    return overrides


def cli_main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise ConfigError("a subcommand is required "
                              f"(one of {', '.join(_SUBCOMMANDS)})")
        overrides = _overrides_from_args(args)
        overrides["experiment"] = _SUBCOMMANDS[args.command]
        config = load_config(args.config, overrides)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return 1
    try:
        report = run_experiment(config)
    except IntegrityError as e:
        print(f"embedded acceptance assertion failed: {e}", file=sys.stderr)
        return 3
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2
    out_path = config.out_path or f"{config.experiment}_report.{config.fmt}"
    try:
        report.write(out_path, config.fmt)
    except OSError as e:
        print(f"cannot write report: {e}", file=sys.stderr)
        return 2
    print(report.summary(), end="")
    print(f"report written to {out_path}")
    if report.violations:
        print(f"{len(report.violations)} embedded assertion violation(s)",
              file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
