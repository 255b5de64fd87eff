"""Command line interface.

Exit codes: 0 success, 2 config error, 3 I/O error, 4 preset check
failure.  KINEX_SEED overrides the config (or preset) seed; an explicit
--seed or --set seed=... on the command line beats the environment.
"""

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, parse_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_CHECK = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinex",
        description="Kinetic-exchange market simulator with an ideal-gas "
                    "cross-check channel.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate",
                         help="run a market experiment from a JSON config")
    sim.add_argument("--config", required=True, help="JSON config file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--jobs", type=int, default=1,
                     help="max replicas run in parallel (default 1)")
    sim.add_argument("--seed", type=int, default=None,
                     help="override the config seed")

    pre = sub.add_parser("preset", help="run a named experiment preset")
    pre.add_argument("name", help=f"one of: {', '.join(sorted(harness.PRESETS))}")
    pre.add_argument("--set", action="append", default=[], dest="overrides",
                     metavar="KEY=VALUE", help="override a preset config key")
    pre.add_argument("--out", required=True, help="output directory")
    pre.add_argument("--jobs", type=int, default=1,
                     help="max replicas run in parallel (default 1)")
    pre.add_argument("--seed", type=int, default=None,
                     help="override the preset seed")

    ana = sub.add_parser("analyze",
                         help="distribution statistics for an external CSV")
    ana.add_argument("--samples", required=True,
                     help="CSV of sample values (first column)")
    ana.add_argument("--tail-fraction", type=float,
                     default=harness.TAIL_FRACTION,
                     help="top fraction for the tail fit (default 0.05)")
    return parser


def _env_seed():
    raw = os.environ.get("KINEX_SEED")
    if raw is None:
        return None
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError("KINEX_SEED must be an integer") from None
    if seed < 0:
        raise ConfigError("KINEX_SEED must be a non-negative integer")
    return seed


def _parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"override {item!r} must look like key=value")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw      # bare strings stay strings: --set model=ccm
        out[key] = value
    return out


def _cmd_simulate(args) -> int:
    text = Path(args.config).read_text()
    config = parse_config(text)
    seed = args.seed if args.seed is not None else _env_seed()
    if seed is not None:
        if seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        config = dataclasses.replace(config, seed=seed)
    report = harness.run_simulation(config, args.out, jobs=args.jobs)
    print(f"report: {Path(args.out) / 'report.json'}")
    print(f"n_samples={report.n_samples} mean={report.sample_mean:.6g} "
          f"gini={report.gini:.6g} ks_vs_gibbs={report.ks_vs_gibbs:.6g}")
    return EXIT_OK


def _cmd_preset(args) -> int:
    overrides = _parse_overrides(args.overrides)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        overrides["seed"] = args.seed
    elif "seed" not in overrides:
        env = _env_seed()
        if env is not None:
            overrides["seed"] = env
    report = harness.run_preset(args.name, overrides, args.out, jobs=args.jobs)
    for check, ok in report.checks.items():
        print(f"check {check}: {'pass' if ok else 'FAIL'}")
    print(f"preset {args.name}: {'PASS' if report.passed else 'FAIL'} "
          f"({report.wall_time_s:.2f}s, report {Path(args.out) / 'report.json'})")
    return EXIT_OK if report.passed else EXIT_CHECK


def _cmd_analyze(args) -> int:
    samples = harness.load_samples_csv(args.samples)
    result = harness.analyze_samples(samples, tail_fraction=args.tail_fraction)
    print(harness.dumps_json(result))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "preset":
            return _cmd_preset(args)
        return _cmd_analyze(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
