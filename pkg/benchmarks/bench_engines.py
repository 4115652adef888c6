"""Compare the compiled and pure-python engines on identical instances.

Run from the repository root:

    python3 benchmarks/bench_engines.py [--n 16] [--trials 40] [--seed 0]

Every trial is executed on both engines with the same derived RNG stream;
outputs and meters must match exactly, and the wall-clock totals are
reported side by side.  Exits non-zero if the compiled engine is missing
or any twin pair disagrees.
"""

import argparse
import sys
import time

import numpy as np

from parsubmax import _kernels
from parsubmax.constraints import CostModel, Knapsack, build_partition_matroid, unit_costs
from parsubmax.core import Tally, spawn_rng
from parsubmax.harness.data import gen_cut_weights
from parsubmax.objectives import CutOracle
from parsubmax.parskp import SkpConfig, par_skp
from parsubmax.parssp import SspConfig, par_ssp
from parsubmax.randbatch import RandBatchParams, rand_batch


def bench_rand_batch(n, trials, seed, engine):
    total = 0.0
    outs = []
    for trial in range(trials):
        irng = spawn_rng(seed, 0, trial)
        oracle = CutOracle(gen_cut_weights(n, irng, density=0.5))
        c = 0.5 + irng.random(n)
        costs = CostModel(c, B=float(c.sum()) * 0.5)
        system = Knapsack(costs)
        dens = max(oracle.value({u}) / c[u] for u in range(n))
        params = RandBatchParams(rho=0.3 * dens, M=3, p=0.5, epsilon=0.2)
        tally = Tally()
        t0 = time.perf_counter()
        res = rand_batch(params, range(n), oracle, costs, system,
                         spawn_rng(seed, 1, trial), tally=tally, force_engine=engine)
        total += time.perf_counter() - t0
        outs.append((sorted(res.A), res.U, sorted(res.L), res.count,
                     res.value, tally.as_dict()))
    return total, outs


def bench_par_skp(n, trials, seed, engine):
    total = 0.0
    outs = []
    config = SkpConfig(epsilon=0.3)
    for trial in range(trials):
        irng = spawn_rng(seed, 2, trial)
        oracle = CutOracle(gen_cut_weights(n, irng, density=0.5))
        c = 0.5 + irng.random(n)
        costs = CostModel(c, B=float(c.sum()) * 0.5)
        tally = Tally()
        t0 = time.perf_counter()
        S = par_skp(config, oracle, costs, rng=spawn_rng(seed, 3, trial),
                    tally=tally, force_engine=engine)
        total += time.perf_counter() - t0
        outs.append((sorted(S), tally.as_dict()))
    return total, outs


def bench_par_ssp(n, trials, seed, engine):
    total = 0.0
    outs = []
    config = SspConfig(epsilon=0.3)
    for trial in range(trials):
        irng = spawn_rng(seed, 4, trial)
        oracle = CutOracle(gen_cut_weights(n, irng, density=0.5))
        system = build_partition_matroid([u % 3 for u in range(n)], {0: 2, 1: 2, 2: 2})
        tally = Tally()
        t0 = time.perf_counter()
        S = par_ssp(config, oracle, system, rng=spawn_rng(seed, 5, trial),
                    tally=tally, force_engine=engine)
        total += time.perf_counter() - t0
        outs.append((sorted(S), tally.as_dict()))
    return total, outs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--trials", type=int, default=40)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _kernels.available():
        print("compiled engine unavailable; nothing to compare", file=sys.stderr)
        return 1
    if args.n > 20:
        print("n must be <= 20 so the compiled engine can run", file=sys.stderr)
        return 1

    benches = (("rand_batch", bench_rand_batch),
               ("par_skp", bench_par_skp),
               ("par_ssp", bench_par_ssp))
    print("n=%d trials=%d seed=%d" % (args.n, args.trials, args.seed))
    print("%-12s %12s %12s %8s  %s" % ("routine", "generic (s)", "kernel (s)", "speedup", "outputs"))
    failed = False
    for name, fn in benches:
        tg, og = fn(args.n, args.trials, args.seed, "generic")
        tk, ok_ = fn(args.n, args.trials, args.seed, "kernel")
        same = og == ok_
        failed |= not same
        print("%-12s %12.4f %12.4f %7.2fx  %s" % (
            name, tg, tk, tg / tk if tk > 0 else float("inf"),
            "identical" if same else "MISMATCH"))
    if failed:
        print("engine outputs disagree", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
