"""k-system maximization by a decreasing ladder of density thresholds.

par_ssp runs one batch-selection pass per threshold, each against the
objective shifted by everything accepted so far and the constraint
contracted the same way, so the growing solution stays independent by
construction.  Elements touched by a pass (kept, rejected, or still on
the shortlist when the pass hit its cap) never return.  The best
single element is kept as a safety candidate.
"""

import math
import warnings

import numpy as np

from .constraints import Cardinality, Contraction, unit_costs
from .core import InputError, Tally, shift_oracle, spawn_rng
from .randbatch import SEARCH_MODES, RandBatchParams, get_seq, normalize_instance, rand_batch


class SspConfig:
    """Knobs for one k-system solver run.

    p=None defers to default_p once the system's k is known.  r_override
    pins the maximum-feasible-size bound instead of estimating it.
    """

    def __init__(self, p=None, epsilon=0.3, search_mode="linear", seed=None, r_override=None):
        if p is not None:
            p = float(p)
            if not 0.0 < p <= 1.0:
                raise InputError("p must lie in (0, 1]")
        epsilon = float(epsilon)
        if not 0.0 < epsilon <= 0.4:
            raise InputError("epsilon must lie in (0, 0.4]")
        if search_mode not in SEARCH_MODES:
            raise InputError("search_mode must be one of %s" % (SEARCH_MODES,))
        if r_override is not None:
            r_override = int(r_override)
            if r_override < 1:
                raise InputError("r_override must be a positive integer")
        self.p = p
        self.epsilon = epsilon
        self.search_mode = search_mode
        self.seed = seed
        self.r_override = r_override


def default_p(k, cardinality=False):
    """Acceptance probability tuned to the constraint class."""
    k = int(k)
    if k < 1:
        raise InputError("k must be a positive integer")
    if cardinality:
        return 0.5
    return 1.0 / (1.0 + math.sqrt(k + 1.0))


class ThresholdSchedule:
    """Phase thresholds rho_max*(1-eps)^(i-1) and the per-phase cap.

    ell phases take the threshold from rho_max down to roughly
    eps*rho_max/r, at which point even r leftover elements cannot matter.
    """

    def __init__(self, rho_max, r, epsilon):
        rho_max = float(rho_max)
        epsilon = float(epsilon)
        r = int(r)
        if rho_max <= 0.0 or not math.isfinite(rho_max):
            raise InputError("rho_max must be positive and finite")
        if r < 1:
            raise InputError("r must be a positive integer")
        if not 0.0 < epsilon < 1.0:
            raise InputError("epsilon must lie in (0, 1)")
        self.rho_max = rho_max
        self.epsilon = epsilon
        g = math.log(epsilon / r) / math.log1p(-epsilon)
        self.ell = int(math.ceil(g)) + 1
        self.M = int(math.ceil((g + 2.0) / (epsilon * epsilon)))

    def rho(self, i):
        """Threshold of phase i (1-based)."""
        if not 1 <= i <= self.ell:
            raise InputError("phase index out of range")
        return self.rho_max * (1.0 - self.epsilon) ** (i - 1)


def effective_r(system, ground, rng=None, r_override=None, tally=None):
    """Upper bound on the largest feasible set inside ground.

    Either the caller's override, or k times the size of one maximal
    feasible set (found with no value queries).
    """
    if r_override is not None:
        r = int(r_override)
        if r < 1:
            raise InputError("r_override must be a positive integer")
        return r
    rng = np.random.default_rng() if rng is None else rng
    base = get_seq(set(), ground, system, rng, tally)
    return int(system.k) * len(base)


def par_ssp(config, oracle, system, rng=None, tally=None, force_engine=None):
    """Independence-constrained maximization, best of ladder and singleton.

    Preprocessing spends one round on all singleton values plus one
    zero-query pass to bound the solution size; then every phase runs a
    batch selection at its threshold.  The returned set is independent.
    """
    tally = Tally() if tally is None else tally
    rng = np.random.default_rng(config.seed) if rng is None else rng
    n = oracle.n
    if system.k_unbounded:
        raise InputError("system must declare a finite k")
    if n == 0:
        return set()
    k = int(system.k)
    p = config.p if config.p is not None else default_p(k, isinstance(system, Cardinality))
    oracle, system = normalize_instance(oracle, system)
    master = rng.bit_generator.seed_seq
    costs = unit_costs(n)

    ids = np.arange(n, dtype=np.intp)
    sing = oracle.chain_extension_values(set(), [], ids)[0]
    tally.count_round(n)
    feas = np.asarray(system.extend_feasible(set(), ids))
    tally.count_independence(n)
    good = ids[feas]
    if not len(good):
        return set()
    j = int(np.argmax(sing[feas]))
    ustar = int(good[j])
    fstar = float(sing[feas][j])
    if fstar <= 0.0:
        warnings.warn(
            "maximum feasible singleton value is not positive; thresholds are undefined, returning the empty set",
            RuntimeWarning,
        )
        return set()

    r = effective_r(system, range(n), spawn_rng(master, 0), config.r_override, tally)
    sched = ThresholdSchedule(fstar, r, config.epsilon)

    T = set()
    fT = None
    I = list(range(n))
    for idx in range(sched.ell):
        params = RandBatchParams(
            rho=sched.rho(idx + 1), M=sched.M, p=p,
            epsilon=config.epsilon, search_mode=config.search_mode,
        )
        sh = shift_oracle(oracle, T)
        sys_i = Contraction(system, T) if T else system
        res = rand_batch(params, I, sh, costs, sys_i, spawn_rng(master, 1, idx), tally, force_engine)
        T |= res.A
        fT = res.value
        I = sorted(set(I) - set(res.U) - res.L)
    return {ustar} if fstar > fT else set(T)
