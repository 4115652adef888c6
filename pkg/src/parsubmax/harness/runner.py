"""Experiment orchestration: instances, baselines, metering, CSV rows.

One ExperimentConfig describes a (problem, algorithm, sweep) triple;
run_experiment builds the instance once, then runs every sweep point
and repeat on its own derived RNG stream, so results never depend on
which other algorithms ran in the same session.  Every output set is
feasibility-checked before its row is recorded.
"""

import time
import zlib

import numpy as np

from ..constraints import (
    Knapsack,
    TrivialSystem,
    build_cardinality,
    build_intersection,
    build_label_system,
    build_partition_matroid,
    unit_costs,
)
from ..core import InputError, Tally, spawn_rng
from ..objectives import (
    CutOracle,
    ImageOracle,
    RevenueOracle,
    brute_force_opt,
    image_costs,
    movie_costs,
    movie_oracle,
    revenue_costs,
)
from ..parskp import SkpConfig, par_skp
from ..parssp import SspConfig, par_ssp
from ..usm import RANDOM_SUBSET
from . import data

PROBLEMS = ("synthetic-cut", "revenue", "movie", "image")
ALGORITHMS = ("parskp", "parssp", "usm", "greedy", "bruteforce")
CSV_HEADER = "algorithm,problem,n,param,seed,utility,rounds,queries,max_queries_per_round,independence_checks,wall_ms"

REVENUE_ROUNDS = 3
IMAGE_GROUPS = 3
DEFAULT_N = {"synthetic-cut": 24, "revenue": 10, "movie": 24, "image": 24}


class ExperimentConfig:
    """One sweep's worth of runs; validates the knobs up front."""

    def __init__(self, problem, algorithm, sweep, sweep_kind, repeats=1, seed=0,
                 epsilon=None, alpha=0.25, p=None, search_mode="linear",
                 n=None, data_dir=None, timing=False, force_engine=None):
        if problem not in PROBLEMS:
            raise InputError("unknown problem %r" % (problem,))
        if algorithm not in ALGORITHMS:
            raise InputError("unknown algorithm %r" % (algorithm,))
        if sweep_kind not in ("budget", "m"):
            raise InputError("sweep_kind must be 'budget' or 'm'")
        sweep = list(sweep)
        if not sweep:
            raise InputError("sweep needs at least one value")
        if any(v <= 0 for v in sweep) or any(b <= a for a, b in zip(sweep, sweep[1:])):
            raise InputError("sweep values must be positive and increasing")
        if algorithm == "parskp" and sweep_kind != "budget":
            raise InputError("parskp runs budget sweeps; pass budgets, not sizes")
        if algorithm == "parssp" and sweep_kind != "m":
            raise InputError("parssp runs size sweeps; pass sizes, not budgets")
        repeats = int(repeats)
        if repeats < 1:
            raise InputError("repeats must be >= 1")
        if epsilon is None:
            epsilon = 0.4 if algorithm == "parssp" else 0.1
        epsilon = float(epsilon)
        self.problem = problem
        self.algorithm = algorithm
        self.sweep = sweep
        self.sweep_kind = sweep_kind
        self.repeats = repeats
        self.seed = int(seed)
        self.epsilon = float(epsilon)
        self.alpha = float(alpha)
        self.p = p if p is None else float(p)
        self.search_mode = search_mode
        self.n = None if n is None else int(n)
        self.data_dir = data_dir
        self.timing = bool(timing)
        self.force_engine = force_engine


class ResultRow:
    __slots__ = ("algorithm", "problem", "n", "param", "seed", "utility",
                 "rounds", "queries", "max_queries_per_round",
                 "independence_checks", "wall_ms", "normalized")

    def __init__(self, algorithm, problem, n, param, seed, utility, tally, wall_ms):
        self.algorithm = algorithm
        self.problem = problem
        self.n = int(n)
        self.param = param
        self.seed = int(seed)
        self.utility = float(utility)
        self.rounds = tally.rounds
        self.queries = tally.queries
        self.max_queries_per_round = tally.max_queries_per_round
        self.independence_checks = tally.independence_checks
        self.wall_ms = int(wall_ms)
        self.normalized = None


def density_greedy(oracle, costs, system, tally=None):
    """Sequential baseline: keep adding the best marginal-density element.

    Each pass queries every feasible extension in one round.  The first
    pass doubles as the singleton scan, and the better of the greedy set
    and the best feasible singleton is returned.  A pass with no feasible
    candidates costs nothing.
    """
    tally = Tally() if tally is None else tally
    n = oracle.n
    S = set()
    fS = None
    remaining = np.arange(n, dtype=np.intp)
    best_single = None
    first = True
    while len(remaining):
        feas = np.asarray(system.extend_feasible(S, remaining))
        tally.count_independence(len(remaining))
        cands = remaining[feas]
        if not len(cands):
            break
        vals = oracle.chain_extension_values(S, [], cands)[0]
        if first:
            fS = float(oracle.value(set()))
            tally.count_round(len(cands) + 1)
            j = int(np.argmax(vals))
            best_single = (int(cands[j]), float(vals[j]))
            first = False
        else:
            tally.count_round(len(cands))
        margins = vals - fS
        j = int(np.argmax(margins / costs.c[cands]))
        if margins[j] <= 0.0:
            break
        u = int(cands[j])
        S.add(u)
        fS = float(vals[j])
        remaining = remaining[remaining != u]
    if best_single is not None and (fS is None or best_single[1] > fS):
        return {best_single[0]}
    return S


def _build_base(config):
    """Problem data shared by every sweep point."""
    rng = spawn_rng(np.random.SeedSequence(config.seed), 0)
    n = config.n if config.n is not None else DEFAULT_N[config.problem]
    d = config.data_dir
    if config.problem == "synthetic-cut":
        if d is not None:
            W = data.load_graph_tsv("%s/graph.tsv" % d, directed=False)
        else:
            W = data.gen_cut_weights(n, rng)
        return {"oracle": CutOracle(W), "costs": unit_costs(W.shape[0])}
    if config.problem == "revenue":
        if d is not None:
            W = data.load_graph_tsv("%s/graph.tsv" % d, directed=True)
        else:
            W = data.gen_revenue_weights(n, rng)
        oracle = RevenueOracle(W, REVENUE_ROUNDS)
        return {"oracle": oracle, "costs": revenue_costs(W, REVENUE_ROUNDS), "nv": W.shape[0]}
    if config.problem == "movie":
        if d is not None:
            ratings, genres, qvecs = data.load_movies_csv("%s/movies.csv" % d)
        else:
            ratings, genres, qvecs = data.gen_movie_table(n, rng)
        return {"oracle": movie_oracle(qvecs), "costs": movie_costs(ratings), "genres": genres}
    if d is not None:
        sim = data.load_similarity_csv("%s/similarity.csv" % d)
        pixel_std = data.load_vector_csv("%s/pixel_std.csv" % d)
        if len(pixel_std) != sim.shape[0]:
            raise InputError("similarity and pixel spread sizes disagree")
    else:
        sim, pixel_std = data.gen_image_data(n, rng)
    return {"oracle": ImageOracle(sim), "costs": image_costs(pixel_std)}


def _build_system(config, base, param):
    """Constraint for one sweep point."""
    oracle = base["oracle"]
    n = oracle.n
    if config.algorithm == "usm":
        return TrivialSystem(n), unit_costs(n)
    if config.sweep_kind == "budget":
        costs = base["costs"].with_budget(float(param))
        return Knapsack(costs), costs
    m = int(param)
    if config.problem == "revenue":
        nv = base["nv"]
        product = build_partition_matroid([u // nv for u in range(n)], {i: m for i in range(REVENUE_ROUNDS)})
        node = build_partition_matroid([u % nv for u in range(n)], {v: 1 for v in range(nv)})
        return build_intersection([product, node]), unit_costs(n)
    if config.problem == "movie":
        labels = sorted({g for gs in base["genres"] for g in gs})
        gid = {g: i for i, g in enumerate(labels)}
        label_sets = [{gid[g] for g in gs} for gs in base["genres"]]
        caps = {i: max(1, m // 2) for i in range(len(labels))}
        return build_label_system(label_sets, caps, total_cap=m), unit_costs(n)
    if config.problem == "image":
        groups = [u % IMAGE_GROUPS for u in range(n)]
        return build_partition_matroid(groups, {g: m for g in range(IMAGE_GROUPS)}), unit_costs(n)
    return build_cardinality(n, m), unit_costs(n)


def _run_one(config, oracle, system, costs, rng, tally):
    if config.algorithm == "parskp":
        cfg = SkpConfig(alpha=config.alpha, epsilon=config.epsilon, search_mode=config.search_mode)
        return par_skp(cfg, oracle, costs, rng=rng, tally=tally, force_engine=config.force_engine)
    if config.algorithm == "parssp":
        cfg = SspConfig(p=config.p, epsilon=config.epsilon, search_mode=config.search_mode)
        return par_ssp(cfg, oracle, system, rng=rng, tally=tally, force_engine=config.force_engine)
    if config.algorithm == "usm":
        return RANDOM_SUBSET.solve(range(oracle.n), oracle, rng, tally)
    if config.algorithm == "greedy":
        return density_greedy(oracle, costs, system, tally)
    _, S = brute_force_opt(oracle, system)
    tally.count_round(1 << oracle.n)
    return S


def run_experiment(config):
    """All sweep points x repeats; returns ResultRow list in run order."""
    base = _build_base(config)
    oracle = base["oracle"]
    ss = np.random.SeedSequence(config.seed)
    alg_key = zlib.crc32(config.algorithm.encode())
    rows = []
    for si, param in enumerate(config.sweep):
        system, costs = _build_system(config, base, param)
        for rep in range(config.repeats):
            rng = spawn_rng(ss, 1, alg_key, si, rep)
            tally = Tally()
            t0 = time.perf_counter()
            S = _run_one(config, oracle, system, costs, rng, tally)
            wall = (time.perf_counter() - t0) * 1000.0 if config.timing else 0.0
            if not system.is_independent(S):
                raise AssertionError(
                    "%s produced an infeasible set at %s=%s" % (config.algorithm, config.sweep_kind, param)
                )
            utility = float(oracle.value(S))
            rows.append(ResultRow(config.algorithm, config.problem, oracle.n, param,
                                  config.seed, utility, tally, wall))
    _normalize(rows)
    return rows


def _normalize(rows):
    """Post-hoc per-sweep-point scaling: best utility maps to 1.0."""
    by_param = {}
    for r in rows:
        by_param.setdefault(r.param, []).append(r)
    for group in by_param.values():
        top = max(r.utility for r in group)
        for r in group:
            r.normalized = (r.utility / top) if top > 0 else 0.0


def _fmt_param(param):
    if float(param) == int(param):
        return "%d" % int(param)
    return "%.6g" % float(param)


def write_csv(rows, path):
    """Stable CSV: fixed header, 6-decimal utilities, LF endings."""
    rows = list(rows)
    if not rows:
        raise InputError("no rows to write")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write("%s,%s,%d,%s,%d,%.6f,%d,%d,%d,%d,%d\n" % (
                r.algorithm, r.problem, r.n, _fmt_param(r.param), r.seed,
                r.utility, r.rounds, r.queries, r.max_queries_per_round,
                r.independence_checks, r.wall_ms,
            ))
