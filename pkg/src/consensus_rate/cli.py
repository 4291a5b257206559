"""
Command-line interface.

Reports go to stdout as JSON (one object per line) or CSV; diagnostics and
timings go to stderr.  Exit status is 0 on success, 1 when the input is
invalid or an analysis fails or disagrees with its reference values, and 2
on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .bounds import (
    BoundReport,
    CLOSED_FORM,
    lemma4_closed_form,
    rate_corollary,
    rate_multi,
    rate_single,
    replicate_schedule,
)
from .errors import ConsensusError
from .experiments import EXAMPLES, lemma4_sweep, random_histogram, run_example, sequential_index
from .graphs import check_T_sequential, is_weakly_connected, union_graph
from .matrix_core import load_sequence
from .schedules import IntervalPartition, MultiTreeSchedule, TreeSchedule
from .simulation import empirical_rate, simulate, spectral_rate_periodic

SEED_ENV = "CONSENSUS_RATE_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{SEED_ENV} must be an integer, got {raw!r}")


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


# ------------------------------------------------------------ subcommands


def cmd_validate(args) -> int:
    seq = load_sequence(args.sequence, args.tolerance)
    _emit({"valid": True, "n": seq.n, "kind": seq.kind, "length": len(seq.matrices)})
    return 0


def cmd_connectivity(args) -> int:
    seq = load_sequence(args.sequence)
    if args.T is None:
        part = sequential_index(seq, args.max_T)
    else:
        part = check_T_sequential(seq, args.T, args.horizon)
    if seq.is_periodic:
        window = (0, seq.period)
    else:
        window = (0, seq.horizon if args.horizon is None else args.horizon)
    weak, roots = is_weakly_connected(union_graph(seq, window))
    _emit({"weakly_connected": weak, "roots": sorted(roots), "window": list(window)})
    if part is None:
        _emit({"T": args.T, "partition": None})
        return 1
    _emit({"T": part.max_gap, "breakpoints": list(part.breakpoints),
           "cycle_start": part.cycle_start})
    for interval, sched in zip(part.intervals, part.schedules):
        _emit({"interval": list(interval), "schedule": sched.to_dict()})
    return 0


def cmd_bound(args) -> int:
    if args.method == "corollary":
        if args.alpha is None or args.T is None:
            raise _Usage("--method corollary needs --alpha and --T")
        _emit(rate_corollary(args.alpha, args.T).to_dict())
        return 0
    if args.method == "lemma4":
        if args.n is None or args.q is None or args.gamma is None:
            raise _Usage("--method lemma4 needs --n, --q and --gamma")
        rate = lemma4_closed_form(args.n, args.q, args.gamma)
        T = args.n + args.q - 2
        _emit(BoundReport(CLOSED_FORM, (rate**T,), rate, IntervalPartition((0, T), 0)).to_dict())
        return 0
    if args.sequence is None:
        raise _Usage(f"--method {args.method} needs a sequence file")
    seq = load_sequence(args.sequence)
    if args.method == "single":
        if args.schedule is not None:
            sched = TreeSchedule.from_dict(_load_json(args.schedule))
            part, copies = replicate_schedule(seq, sched)
            report = rate_single(seq, part, copies)
        else:
            part = sequential_index(seq, args.max_T) if args.T is None else check_T_sequential(seq, args.T)
            if part is None:
                _emit({"method": "single_tree", "error": "no sequential partition found"})
                return 1
            report = rate_single(seq, part)
    else:
        if args.schedule is None:
            raise _Usage("--method multi needs --schedule")
        ms = MultiTreeSchedule.from_dict(_load_json(args.schedule))
        part, copies = replicate_schedule(seq, ms)
        report = rate_multi(seq, part, copies)
    _emit(report.to_dict())
    return 0


def cmd_simulate(args) -> int:
    seq = load_sequence(args.sequence)
    if args.rate:
        _emit(empirical_rate(seq, args.horizon, args.samples, args.seed).to_dict())
        return 0
    if args.x0 is not None:
        x0 = np.asarray(_load_json(args.x0), dtype=float)
    else:
        x0 = np.random.default_rng(args.seed).uniform(size=seq.n)
    traj = simulate(seq, x0, args.horizon)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["t", "diameter"])
    for t, d in enumerate(traj.diameters):
        writer.writerow([t, repr(float(d))])
    return 0


def cmd_spectral(args) -> int:
    seq = load_sequence(args.sequence)
    _emit({"spectral_rate": spectral_rate_periodic(seq), "period": seq.period})
    return 0


def cmd_example(args) -> int:
    params = {
        "eps": args.eps, "gamma": args.gamma, "eta": args.eta, "n": args.n, "q": args.q,
        "seed": args.seed, "horizon": args.horizon, "samples": args.samples,
        "trials": args.trials,
    }
    result = run_example(args.name, **params)
    print(f"{args.name}: {result.runtime:.3f} s", file=sys.stderr)
    _emit(result.to_dict())
    return 0 if result.passed else 1


def cmd_histogram(args) -> int:
    start = time.perf_counter()
    report = random_histogram(args.trials, args.seed)
    print(f"histogram: {time.perf_counter() - start:.3f} s", file=sys.stderr)
    doc = report.to_dict()
    doc["seed"] = args.seed
    if args.figure:
        from .plotting import histogram_figure

        histogram_figure(report, args.figure)
        doc["figure"] = args.figure
    _emit(doc)
    return 0


def cmd_sweep(args) -> int:
    if args.gammas:
        gammas = _floats(args.gammas)
    else:
        gammas = [round(v, 10) for v in np.linspace(0.05, 0.95, args.gamma_steps)]
    result = lemma4_sweep(args.n, args.q_max, gammas)
    sys.stdout.write(result.to_csv())
    if args.figure:
        from .plotting import sweep_figure

        sweep_figure(result, args.figure)
        print(f"figure written to {args.figure}", file=sys.stderr)
    return 0 if result.passed else 1


# ---------------------------------------------------------------- parser


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Usage(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="consensus-rate",
        description="Contraction-rate analysis of time-varying consensus systems.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    seed = _default_seed()

    p = sub.add_parser("validate", help="check a sequence file")
    p.add_argument("sequence")
    p.add_argument("--tolerance", type=float, default=1e-12)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("connectivity", help="T-sequential partition and schedules")
    p.add_argument("sequence")
    p.add_argument("--T", type=int, help="interval bound; default: smallest that works")
    p.add_argument("--max-T", type=int, default=16)
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=cmd_connectivity)

    p = sub.add_parser("bound", help="contraction-rate upper bound")
    p.add_argument("sequence", nargs="?")
    p.add_argument("--method", choices=["single", "multi", "corollary", "lemma4"], default="single")
    p.add_argument("--schedule", help="tree or multi-tree schedule JSON")
    p.add_argument("--T", type=int)
    p.add_argument("--max-T", type=int, default=16)
    p.add_argument("--alpha", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--gamma", type=float)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate", help="diameter trajectory as CSV")
    p.add_argument("sequence")
    p.add_argument("--horizon", type=int, default=32)
    p.add_argument("--samples", type=int, default=32)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--x0", help="JSON list with the initial state")
    p.add_argument("--rate", action="store_true", help="print the empirical rate instead")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectral", help="exact rate of a periodic sequence")
    p.add_argument("sequence")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("example", help="run a worked example")
    p.add_argument("name", choices=sorted(EXAMPLES))
    p.add_argument("--eps", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--horizon", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("histogram", help="ratio histogram over random systems")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--figure", help="also save a bar chart to this path")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("sweep", help="closed-form chain rates as CSV")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--q-max", type=int, default=3)
    p.add_argument("--gammas", help="comma-separated gamma values")
    p.add_argument("--gamma-steps", type=int, default=19)
    p.add_argument("--figure", help="also save the curves to this path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 2
        return args.func(args)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ConsensusError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
