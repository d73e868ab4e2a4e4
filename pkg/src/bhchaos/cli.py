"""Command-line entry point: one subcommand per experiment.

Exit codes: 0 success, 2 configuration problem, 3 capacity exceeded,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import EXPERIMENTS, parse_config, validate_config
from .errors import CapacityError, ConfigError, NumericError
from .experiments import run, write_tables

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAPACITY = 3
EXIT_NUMERIC = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bhchaos",
        description="Bose-Hubbard chaos experiments: exact, semiclassical, and mean-field.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=None, help="output directory (default: config or cwd)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads; 0 = all cores")
        p.add_argument("--validate-only", action="store_true",
                       help="check the config and exit without running")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    problems = validate_config(raw)
    if raw.get("experiment") not in (None, args.command):
        problems.append(
            f"experiment: config says {raw.get('experiment')!r} but subcommand is {args.command!r}"
        )
    if args.validate_only:
        if problems:
            for p in problems:
                print(p)
            return EXIT_CONFIG
        print("config ok")
        return EXIT_OK
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_CONFIG

    cfg = parse_config(raw)
    try:
        tables = run(cfg, seed=args.seed, threads=args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"error: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except NumericError as exc:
        print(f"error: numerics: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out_dir = args.out or cfg.out or "."
    for csv_path, meta_path in write_tables(tables, out_dir):
        print(f"wrote {csv_path} and {meta_path}")
    for t in tables:
        wall = t.metadata.get("wall_time_s")
        print(f"{t.name}: {len(t.rows)} rows, {wall}s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
