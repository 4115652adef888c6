"""Knapsack-constrained maximization by parallel threshold probing.

par_skp sweeps a geometric ladder of density thresholds; each threshold
gets a handful of independent probe branches, and every branch runs two
complementary batch selections, a single-element boost, and (when the
small-cost elements all fit) an unconstrained-maximizer fallback.  The
best feasible candidate across all branches wins.  Branches are
independent given their derived RNG streams, so rounds are accounted as
the deepest branch, not the sum.
"""

import math
import warnings

import numpy as np

from . import _kernels
from .constraints import Knapsack, MaskSystem
from .core import InputError, TableOracle, Tally, spawn_rng
from .randbatch import SEARCH_MODES, RandBatchParams, normalize_instance, rand_batch
from .usm import RANDOM_SUBSET


class SkpConfig:
    """Knobs for one knapsack-solver run."""

    def __init__(self, alpha=0.25, epsilon=0.1, search_mode="linear", seed=None):
        alpha = float(alpha)
        epsilon = float(epsilon)
        if not 0.0 < alpha < 0.5:
            raise InputError("alpha must lie in (0, 1/2)")
        if not 0.0 < epsilon < 5.0 / 6.0:
            raise InputError("epsilon must lie in (0, 5/6)")
        if search_mode not in SEARCH_MODES:
            raise InputError("search_mode must be one of %s" % (SEARCH_MODES,))
        self.alpha = alpha
        self.epsilon = epsilon
        self.search_mode = search_mode
        self.seed = seed


class ThresholdGrid:
    """Geometric ladder of density thresholds inside [rho_min, rho_max].

    values lists every (1-epsilon)^(-z) in range, largest first, so any
    target density in range has a grid point within a (1-epsilon) factor
    below it.  The grid may be empty when the range is narrower than one
    geometric step.
    """

    def __init__(self, rho_min, rho_max, epsilon):
        epsilon = float(epsilon)
        if not 0.0 < epsilon < 1.0:
            raise InputError("epsilon must lie in (0, 1)")
        rho_min = float(rho_min)
        rho_max = float(rho_max)
        if rho_min <= 0.0 or not math.isfinite(rho_min) or not math.isfinite(rho_max):
            raise InputError("threshold range must be positive and finite")
        self.rho_min = rho_min
        self.rho_max = rho_max
        q = -math.log1p(-epsilon)
        # nudge the boundaries by an ulp-scale slack so that a rho_min or
        # rho_max sitting exactly on a ladder rung is kept
        z_lo = math.ceil(math.log(rho_min) / q - 1e-12)
        z_hi = math.floor(math.log(rho_max) / q + 1e-12)
        self.values = [math.exp(z * q) for z in range(z_hi, z_lo - 1, -1)]

    def __len__(self):
        return len(self.values)


def threshold_repeats(epsilon):
    """Independent probe repetitions per grid threshold."""
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0:
        raise InputError("epsilon must lie in (0, 1)")
    return int(math.ceil(math.log(epsilon) / math.log1p(-epsilon)))


def _count_cap(epsilon):
    return int(math.ceil(epsilon ** -2.0))


def _kernel_views(oracle, system, usm, force_engine):
    """Dense tables for the whole-probe kernel, or None.

    The compiled probe covers only the stock unconstrained maximizer and
    plain table-backed instances; anything fancier runs the generic path
    (whose inner batch selections may still use the kernel).
    """
    if force_engine == "generic" or usm is not RANDOM_SUBSET:
        return None
    if not _kernels.available():
        if force_engine == "kernel":
            raise InputError("compiled kernel unavailable for this instance")
        return None
    if type(oracle) is TableOracle and type(system) is MaskSystem:
        return (
            np.ascontiguousarray(oracle.table, dtype=np.float64),
            np.ascontiguousarray(system.table, dtype=np.uint8),
        )
    if force_engine == "kernel":
        raise InputError("compiled kernel unavailable for this instance")
    return None


def _mask_of_ids(ids):
    mask = 0
    for u in ids:
        mask |= 1 << int(u)
    return mask


def _probe_generic(rho, N1, N2, epsilon, oracle, costs, system, usm, rng, tally, search_mode, force_engine):
    """One probe branch; returns (candidate set, its value)."""
    params = RandBatchParams(rho=rho, M=_count_cap(epsilon), p=1.0, epsilon=epsilon, search_mode=search_mode)
    r1 = rand_batch(params, N1, oracle, costs, system, rng, tally, force_engine)
    rest = sorted(set(N1) - r1.A)
    r2 = rand_batch(params, rest, oracle, costs, system, rng, tally, force_engine)
    best_S, best_v = set(), r1.start_value
    for res in (r1, r2):
        if res.value > best_v:
            best_S, best_v = set(res.A), res.value
        # boost: the best single still-affordable element on top of res.A
        cands = np.array([u for u in N1 if u not in res.A], dtype=np.intp)
        if len(cands):
            ok = np.asarray(system.extend_feasible(res.A, cands))
            tally.count_independence(len(cands))
            good = cands[ok]
            if len(good):
                vals = oracle.chain_extension_values(res.A, [], good)[0]
                tally.count_round(len(good))
                j = int(np.argmax(vals))
                if vals[j] > best_v:
                    best_S, best_v = set(res.A) | {int(good[j])}, float(vals[j])
    X = set(N2) | r1.A
    tally.count_independence(1)
    if system.is_independent(X):
        S3, v3 = usm.solve_with_value(X, oracle, rng, tally)
        if v3 > best_v:
            best_S, best_v = set(S3), float(v3)
    return best_S, best_v


def _probe(rho, N1, N2, epsilon, oracle, costs, system, usm, rng, tally, search_mode, force_engine):
    views = _kernel_views(oracle, system, usm, force_engine)
    if views is not None:
        table, indep = views
        S_mask, value, q, r, mq, ch = _kernels._ext.probe_masked(
            table,
            indep,
            np.ascontiguousarray(costs.c, dtype=np.float64),
            _mask_of_ids(N1),
            _mask_of_ids(N2),
            float(rho),
            _count_cap(epsilon),
            float(epsilon),
            1 if search_mode == "binary" else 0,
            rng.bit_generator,
        )
        sub = Tally()
        sub.queries = int(q)
        sub.rounds = int(r)
        sub.max_queries_per_round = int(mq)
        sub.independence_checks = int(ch)
        tally.absorb(sub)
        S = {u for u in range(oracle.n) if (int(S_mask) >> u) & 1}
        return S, float(value)
    return _probe_generic(rho, N1, N2, epsilon, oracle, costs, system, usm, rng, tally, search_mode, force_engine)


def probe(rho, N1, N2, epsilon, oracle, costs, usm=RANDOM_SUBSET, rng=None, tally=None, search_mode="linear", force_engine=None):
    """Single-threshold candidate hunt under a knapsack budget.

    Runs two batch selections over N1 (the second on what the first left
    behind), tries boosting each by one affordable element, and, when N2
    together with the first selection fits the budget, lets the
    unconstrained maximizer have a go at that union.  Returns the best
    candidate found; the empty set is always a candidate, so the result
    never loses to doing nothing.
    """
    if rho <= 0:
        raise InputError("rho must be positive")
    N1 = sorted(set(int(u) for u in N1))
    N2 = sorted(set(int(u) for u in N2))
    if set(N1) & set(N2):
        raise InputError("N1 and N2 must be disjoint")
    tally = Tally() if tally is None else tally
    rng = np.random.default_rng() if rng is None else rng
    system = Knapsack(costs)
    oracle, system = normalize_instance(oracle, system)
    S, _ = _probe(rho, N1, N2, epsilon, oracle, costs, system, usm, rng, tally, search_mode, force_engine)
    return S


def par_skp(config, oracle, costs, usm=RANDOM_SUBSET, rng=None, tally=None, force_engine=None):
    """Budget-constrained maximization over a full threshold sweep.

    Preprocessing spends one round on all singleton values and one on an
    unconstrained pass over the cheap elements; then every (threshold,
    repetition) pair probes independently on its own derived RNG stream.
    Returns the best set found.  Its cost never exceeds the budget.
    """
    tally = Tally() if tally is None else tally
    rng = np.random.default_rng(config.seed) if rng is None else rng
    n = oracle.n
    if costs.B is None:
        raise InputError("knapsack budget required")
    if len(costs.c) != n:
        raise InputError("cost vector length must match the ground set")
    B = float(costs.B)
    if np.any(costs.c > B):
        raise InputError("every element must fit the budget on its own")
    if n == 0:
        return set()
    system = Knapsack(costs)
    oracle, system = normalize_instance(oracle, system)
    master = rng.bit_generator.seed_seq

    ids = np.arange(n, dtype=np.intp)
    big = costs.c > config.epsilon * B / n
    N1 = [int(u) for u in ids[big]]
    N2 = [int(u) for u in ids[~big]]

    sing = oracle.chain_extension_values(set(), [], ids)[0]
    tally.count_round(n)
    ustar = int(np.argmax(sing))
    fstar = float(sing[ustar])
    if fstar <= 0.0:
        warnings.warn(
            "maximum singleton value is not positive; the threshold grid is undefined, returning the empty set",
            RuntimeWarning,
        )
        return set()

    best_S, best_v = usm.solve_with_value(N2, oracle, spawn_rng(master, 0), tally)
    best_S = set(best_S)
    best_v = float(best_v)
    if fstar > best_v:
        best_S, best_v = {ustar}, fstar

    grid = ThresholdGrid(
        config.alpha * fstar / B,
        n * n * config.alpha * fstar / (config.epsilon * B),
        config.epsilon,
    )
    reps = threshold_repeats(config.epsilon)
    views = _kernel_views(oracle, system, usm, force_engine)
    if views is not None:
        table, indep = views
        cvec = np.ascontiguousarray(costs.c, dtype=np.float64)
        N1_mask = _mask_of_ids(N1)
        N2_mask = _mask_of_ids(N2)
        cap = _count_cap(config.epsilon)
        binary = 1 if config.search_mode == "binary" else 0
        kernel_probe = _kernels._ext.probe_masked

    # the branch sweep is the hot loop: plain integer merging here, one
    # parallel absorb at the end
    best_mask = None
    q_sum = 0
    ch_sum = 0
    r_max = 0
    mq_max = 0
    branch = 0
    for rho in grid.values:
        for _ in range(reps):
            b_rng = spawn_rng(master, 1, branch)
            branch += 1
            if views is not None:
                S_mask, v_b, q, r, mq, ch = kernel_probe(
                    table, indep, cvec, N1_mask, N2_mask, float(rho), cap,
                    config.epsilon, binary, b_rng.bit_generator,
                )
                q_sum += q
                ch_sum += ch
                if r > r_max:
                    r_max = r
                if mq > mq_max:
                    mq_max = mq
                if v_b > best_v:
                    best_v = float(v_b)
                    best_mask = int(S_mask)
            else:
                sub = Tally()
                S_b, v_b = _probe_generic(
                    rho, N1, N2, config.epsilon, oracle, costs, system, usm,
                    b_rng, sub, config.search_mode, force_engine,
                )
                q_sum += sub.queries
                ch_sum += sub.independence_checks
                if sub.rounds > r_max:
                    r_max = sub.rounds
                if sub.max_queries_per_round > mq_max:
                    mq_max = sub.max_queries_per_round
                if v_b > best_v:
                    best_v = v_b
                    best_S = S_b
                    best_mask = None
    if branch:
        tally.rounds += r_max
        tally.queries += q_sum
        tally.independence_checks += ch_sum
        if mq_max > tally.max_queries_per_round:
            tally.max_queries_per_round = mq_max
    if best_mask is not None:
        best_S = {u for u in range(n) if (best_mask >> u) & 1}
    return best_S
