"""Command-line interface.

    ineqflow simulate --config cfg.json [--out trace.csv]
    ineqflow simulate --preset example2
    ineqflow check-graph --config cfg.json
    ineqflow verify-bound --config cfg.json --pairs 0:20:5

Exit status: 0 success, 1 invalid input, 2 runtime failure.
"""

import argparse
import sys
from dataclasses import replace

from . import experiment
from .config import load_config
from .errors import Interrupted, ParseError, UnknownPreset, ValidationError
from .presets import NAMES, preset

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def run_experiment(config, out=None, stream=None) -> int:
    stream = stream or sys.stdout
    path = out or config.output or f"{config.name}.csv"
    try:
        trace = experiment.simulate(config)
    except Interrupted as exc:
        print(f"error: simulation blew up at t={exc.time:g}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        experiment.write_trace_csv(trace, path)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for line in experiment.summary_lines(config, trace):
        print(line, file=stream)
    print(f"trace written to {path}", file=stream)
    return EXIT_OK


def _load(args):
    if args.preset:
        return preset(args.preset)
    return load_config(args.config)


def _add_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="experiment config (JSON)")
    src.add_argument("--preset", choices=NAMES, help="shipped preset")


def build_parser():
    parser = argparse.ArgumentParser(prog="ineqflow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run an experiment and write a CSV trace")
    _add_source(p)
    p.add_argument("--out", help="CSV output path (default: config output or <name>.csv)")
    p.add_argument("--t-end", type=float, help="override the simulation horizon")

    p = sub.add_parser("check-graph", help="report balancedness, delta-graph and constants")
    _add_source(p)

    p = sub.add_parser("verify-bound", help="check the transition-matrix contraction bound")
    _add_source(p)
    p.add_argument("--pairs", required=True,
                   help="start:stop:num grid, or explicit 's,t;s,t' pairs")
    p.add_argument("--h", type=float, default=1e-3, help="integration step (default 1e-3)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
    except (ParseError, ValidationError, UnknownPreset) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if args.command == "simulate":
        if args.t_end is not None:
            if args.t_end < 0:
                print("error: --t-end must be nonnegative", file=sys.stderr)
                return EXIT_INVALID
            config = replace(config, sim=replace(config.sim, t_end=args.t_end))
        return run_experiment(config, args.out)

    if args.command == "check-graph":
        for line in experiment.check_graph(config).lines():
            print(line)
        return EXIT_OK

    try:
        pairs = experiment.parse_pairs(args.pairs)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        report = experiment.verify_bound(config, pairs, args.h)
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for line in experiment.bound_table(report):
        print(line)
    return EXIT_OK if report.passed else EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
