"""Command line front end.

Three subcommands: `solve` runs one experiment sweep and writes a CSV,
`gen` emits a synthetic instance to a directory, and `verify` runs the
self-check property suites.  Exit codes: 0 on success, 1 for bad input
or I/O trouble, 2 when a correctness assertion fails.
"""

import argparse
import sys

import numpy as np

from .. import _kernels
from ..constraints import (
    Knapsack,
    build_cardinality,
    build_intersection,
    build_label_system,
    build_partition_matroid,
    check_downward_closure,
    unit_costs,
    verify_k_parameter,
)
from ..core import InputError, Tally, shift_oracle
from ..objectives import CutOracle, ImageOracle, RevenueOracle, movie_oracle
from ..parskp import SkpConfig, par_skp
from . import data
from .runner import ALGORITHMS, PROBLEMS, ExperimentConfig, run_experiment, write_csv

GEN_KINDS = ("cut", "revenue", "movie", "image")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as InputError (exit code 1)."""

    def error(self, message):
        raise InputError(message)


def _num_list(text, kind, flag):
    out = []
    for piece in text.split(","):
        piece = piece.strip()
        try:
            out.append(kind(piece))
        except ValueError:
            raise InputError("%s: %r is not a number" % (flag, piece))
    return out


def build_parser():
    p = _Parser(prog="parsubmax", description="Parallel submodular maximization toolkit")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("solve", help="run one experiment sweep, write CSV")
    s.add_argument("--problem", required=True, choices=PROBLEMS)
    s.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    s.add_argument("--epsilon", type=float, default=None, help="accuracy knob (default 0.1, 0.4 for parssp)")
    s.add_argument("--alpha", type=float, default=0.25, help="budget fraction for the knapsack solver")
    s.add_argument("--p", type=float, default=None, help="acceptance probability override")
    s.add_argument("--budget", default=None, help="comma-separated knapsack budgets")
    s.add_argument("--m", default=None, help="comma-separated independence-system sizes")
    s.add_argument("--repeats", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--search", choices=("linear", "binary"), default="linear")
    s.add_argument("--out", required=True, help="CSV output path")
    s.add_argument("--data", default=None, help="directory of instance files (else synthesize)")
    s.add_argument("--n", type=int, default=None, help="synthetic instance size")
    s.add_argument("--timing", action="store_true", help="record wall-clock milliseconds")
    s.add_argument("--force-engine", choices=("generic", "kernel"), default=None)

    g = sub.add_parser("gen", help="write a synthetic instance")
    g.add_argument("--kind", required=True, choices=GEN_KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")

    v = sub.add_parser("verify", help="run the self-check property suites")
    v.add_argument("--seed", type=int, default=0)
    return p


def _solve(args):
    if args.budget is not None and args.m is not None:
        raise InputError("pass --budget or --m, not both")
    if args.budget is not None:
        sweep, kind = _num_list(args.budget, float, "--budget"), "budget"
    elif args.m is not None:
        sweep, kind = _num_list(args.m, int, "--m"), "m"
    elif args.algorithm == "usm":
        sweep, kind = [1], "m"
    else:
        raise InputError("pass --budget or --m")
    config = ExperimentConfig(
        problem=args.problem,
        algorithm=args.algorithm,
        sweep=sweep,
        sweep_kind=kind,
        repeats=args.repeats,
        seed=args.seed,
        epsilon=args.epsilon,
        alpha=args.alpha,
        p=args.p,
        search_mode=args.search,
        n=args.n,
        data_dir=args.data,
        timing=args.timing,
        force_engine=args.force_engine,
    )
    rows = run_experiment(config)
    write_csv(rows, args.out)
    print("wrote %d rows -> %s" % (len(rows), args.out))
    return 0


def _gen(args):
    paths = data.generate_synthetic(args.kind, args.n, args.seed, args.out)
    for path in paths:
        print(path)
    return 0


def _ok(label, passed):
    if not passed:
        raise AssertionError("self-check failed: %s" % label)
    print("ok - %s" % label)


def _verify_systems(rng):
    costs = unit_costs(8, B=3.0)
    systems = [
        ("cardinality", build_cardinality(8, 3)),
        ("knapsack", Knapsack(costs)),
        ("partition matroid", build_partition_matroid([u % 3 for u in range(8)], {0: 2, 1: 1, 2: 2})),
        ("label system", build_label_system([{u % 2, (u + 1) % 3} for u in range(8)], {0: 2, 1: 2, 2: 2}, 4)),
    ]
    for name, system in systems:
        _ok("downward closure: %s" % name, check_downward_closure(system, rng, trials=300))

    _ok("k=1 for a partition matroid",
        verify_k_parameter(build_partition_matroid([0, 0, 1, 1], {0: 1, 1: 2}), 4, 1))
    m1 = build_partition_matroid([0, 0, 1], {0: 1, 1: 1})
    m2 = build_partition_matroid([0, 1, 1], {0: 1, 1: 1})
    meet = build_intersection([m1, m2])
    _ok("k=2 needed for a matroid intersection",
        verify_k_parameter(meet, 3, 2) and not verify_k_parameter(meet, 3, 1))


def _verify_oracles(rng):
    oracles = [
        ("cut", CutOracle(data.gen_cut_weights(8, rng))),
        ("revenue", RevenueOracle(data.gen_revenue_weights(4, rng), 2)),
        ("movie", movie_oracle(rng.random((8, 25)))),
        ("image", ImageOracle(data.gen_image_data(8, rng)[0])),
    ]
    oracles.append(("shifted cut", shift_oracle(oracles[0][1], {0, 3})))
    for name, oracle in oracles:
        good = True
        for _ in range(300):
            X = {u for u in range(oracle.n) if rng.random() < 0.5}
            Y = {u for u in range(oracle.n) if rng.random() < 0.5}
            fX, fY = oracle.value(X), oracle.value(Y)
            if fX < -1e-12 or fY < -1e-12:
                good = False
                break
            lhs = fX + fY
            rhs = oracle.value(X | Y) + oracle.value(X & Y)
            if lhs < rhs - 1e-9:
                good = False
                break
        _ok("submodular and non-negative: %s" % name, good)


def _verify_engines(seed):
    if not _kernels.available():
        print("ok - engine twins (compiled kernel not built; generic engine only)")
        return
    rng = np.random.default_rng(seed)
    W = data.gen_cut_weights(10, rng)
    oracle = CutOracle(W)
    costs = unit_costs(10, B=4.0)
    config = SkpConfig(epsilon=0.25)
    picks = []
    for engine in ("generic", "kernel"):
        tally = Tally()
        S = par_skp(config, oracle, costs,
                    rng=np.random.default_rng(seed + 1), tally=tally, force_engine=engine)
        picks.append((sorted(S), tally.as_dict()))
    _ok("engine twins agree", picks[0] == picks[1])


def _verify(args):
    rng = np.random.default_rng(args.seed)
    _verify_systems(rng)
    _verify_oracles(rng)
    _verify_engines(args.seed)
    print("all checks passed")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.cmd == "solve":
            return _solve(args)
        if args.cmd == "gen":
            return _gen(args)
        return _verify(args)
    except InputError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1
    except AssertionError as exc:
        print("assertion failure: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
