"""Batched threshold selection: the engine both solvers are built on.

get_seq grows a maximal random feasible extension using no value
queries.  find_tstar then locates the largest safe prefix of that
extension, either by scoring every prefix in one fully parallel round
(linear) or by bisecting the two monotone stopping rules (binary).
rand_batch drives the accept/reject loop around the two.

Small instances (n <= core.MASK_LIMIT) are transparently rebased onto
dense value/feasibility tables, so runs are bit-identical whether they
execute here or in the compiled kernel.
"""

import numpy as np

from . import _kernels
from .constraints import Contraction, MaskSystem, as_mask_system
from .core import (
    MASK_LIMIT,
    InputError,
    ShiftedOracle,
    TableOracle,
    Tally,
    masked_seq_sum,
    seq_sum,
)

SEARCH_MODES = ("linear", "binary")


class RandBatchParams:
    """Knobs for one rand_batch call."""

    def __init__(self, rho, M, p=1.0, epsilon=0.1, search_mode="linear"):
        if not rho > 0:
            raise InputError("threshold rho must be positive")
        if int(M) != M or M < 1:
            raise InputError("count cap M must be a positive integer")
        if not 0 < p <= 1:
            raise InputError("acceptance probability must be in (0, 1]")
        if not 0 < epsilon < 1:
            raise InputError("epsilon must be in (0, 1)")
        if search_mode not in SEARCH_MODES:
            raise InputError("search_mode must be one of %s" % (SEARCH_MODES,))
        self.rho = float(rho)
        self.M = int(M)
        self.p = float(p)
        self.epsilon = float(epsilon)
        self.search_mode = search_mode


class RandBatchResult:
    """The (A, U, L) triple plus run bookkeeping.

    A: accepted elements; U: every batch element considered, in selection
    order; L: leftovers still above threshold (nonempty only when the
    count cap was hit).  value and start_value are f(A) and f(initial A)
    exactly as the engine computed them, so callers never spend extra
    queries re-learning them.  count is how many accepted batches were
    cut short by the second stopping rule.
    """

    def __init__(self, A, U, L, count, value, start_value):
        self.A = set(A)
        self.U = list(U)
        self.L = set(L)
        self.count = int(count)
        self.value = float(value)
        self.start_value = float(start_value)


def get_seq(A, I, system, rng, tally=None):
    """Maximal random feasible extension of A drawn from I.

    Repeatedly permutes the remaining pool, keeps the longest feasible
    prefix, and filters the rest down to elements that still extend the
    result.  Zero value queries; only independence checks.
    """
    base = set(int(u) for u in A)
    pool = np.fromiter(sorted(set(int(u) for u in I)), dtype=np.intp)
    V = []
    while len(pool):
        keys = rng.random(len(pool))
        perm = pool[np.argsort(keys, kind="stable")]
        feas = system.chain_extend_feasible(base, perm.tolist(), perm)
        diag = np.diagonal(feas)
        bad = np.flatnonzero(~diag)
        s = int(bad[0]) if len(bad) else len(perm)
        if tally is not None:
            tally.count_independence(min(s + 1, len(perm)))
        chosen = [int(u) for u in perm[:s]]
        V.extend(chosen)
        base.update(chosen)
        rest = perm[s:]
        if not len(rest):
            break
        ok = system.extend_feasible(base, rest)
        if tally is not None:
            tally.count_independence(len(rest))
        pool = np.sort(rest[ok])
    return V


class _PrefixSearch:
    """Threshold-location state for one (A, seq, L) triple.

    Owns the chain values f(A), f(A+v1), ..., and the per-prefix
    extension/feasibility rows over L, fetched all at once in linear
    mode or lazily (with a shared row cache) in binary mode.  All query
    and check metering happens at fetch time.
    """

    def __init__(self, oracle, system, costs, A, fA, seq, L_arr, L_marg, rho, epsilon, tally):
        self.oracle = oracle
        self.system = system
        self.A = set(A)
        self.fA = float(fA)
        self.seq = list(seq)
        self.L = np.asarray(L_arr, dtype=np.intp)
        self.L_marg = np.asarray(L_marg, dtype=np.float64)
        self.rho = rho
        self.eps = epsilon
        self.tally = tally
        self.d = len(self.seq)
        self.cL = costs.c[self.L]
        self.costL = seq_sum(self.cL)
        self.chain = oracle.chain_values(self.A, self.seq, f_base=self.fA)
        dj = np.diff(self.chain)
        # cumulative |negative prefix marginal| terms of the second rule
        self.dsum = np.concatenate(([0.0], np.cumsum(np.where(dj < 0, -dj, 0.0))))
        self._ext = {0: self.fA + self.L_marg}
        self._feas = None

    def _feas_matrix(self):
        if self._feas is None:
            feas = np.asarray(self.system.chain_extend_feasible(self.A, self.seq, self.L))
            feas[0, :] = True  # membership in L already certifies A+{u} feasible
            self._feas = feas
        return self._feas

    def _row_pos(self, i):
        margins = self._ext[i] - self.chain[i]
        pos = ((margins / self.cL) >= self.rho) & self._feas_matrix()[i]
        return margins, pos

    def _pred_cost(self, i):
        _, pos = self._row_pos(i)
        return masked_seq_sum(self.cL, pos) <= (1.0 - self.eps) * self.costL

    def _pred_damage(self, i):
        margins, pos = self._row_pos(i)
        lhs = self.eps * masked_seq_sum(margins, pos)
        rhs = masked_seq_sum(-margins, margins < 0.0) + self.dsum[i]
        return lhs <= rhs

    def _fetch(self, rows, meter=True):
        rows = [i for i in rows if i not in self._ext]
        if not rows:
            return
        ext = self.oracle.chain_extension_values(self.A, self.seq, self.L, chain=self.chain, rows=rows)
        for i in rows:
            self._ext[i] = ext[i]
        self._feas_matrix()
        if meter:
            self.tally.count_round(len(rows) * len(self.L))
            self.tally.count_independence(len(rows) * len(self.L))

    def run(self, mode):
        """Returns (t1, t2, tstar)."""
        if self.d == 0:
            return 0, 0, 0
        m = len(self.L)
        if mode == "linear":
            # nothing depends on anything else here: the chain and the
            # whole (d+1) x m grid count as a single adaptive round
            self._fetch(range(1, self.d + 1), meter=False)
            self.tally.count_round(self.d + (self.d + 1) * m)
            self.tally.count_independence(self.d * m)
            t1 = next(i for i in range(self.d + 1) if self._pred_cost(i))
            t2 = next(i for i in range(self.d + 1) if self._pred_damage(i))
            return t1, t2, min(t1, t2)
        # binary: the chain is its own round, then both rules bisect in
        # lockstep over [1, d], sharing fetched rows
        self.tally.count_round(self.d)
        lo1, hi1 = 1, self.d
        lo2, hi2 = 1, self.d
        while lo1 < hi1 or lo2 < hi2:
            want = set()
            if lo1 < hi1:
                want.add((lo1 + hi1) // 2)
            if lo2 < hi2:
                want.add((lo2 + hi2) // 2)
            self._fetch(sorted(want))
            if lo1 < hi1:
                mid = (lo1 + hi1) // 2
                if self._pred_cost(mid):
                    hi1 = mid
                else:
                    lo1 = mid + 1
            if lo2 < hi2:
                mid = (lo2 + hi2) // 2
                if self._pred_damage(mid):
                    hi2 = mid
                else:
                    lo2 = mid + 1
        return lo1, lo2, min(lo1, lo2)

    def refresh_row(self, t, surv):
        """Extension values and feasibility of prefix-t over surviving L.

        Free when row t is cached (always, in linear mode); otherwise one
        round over just the survivors.
        """
        surv_ids = self.L[surv]
        if t in self._ext:
            return self._ext[t][surv], self._feas_matrix()[t][surv]
        if not len(surv_ids):
            return np.empty(0), np.empty(0, dtype=bool)
        vals = self.oracle.chain_extension_values(self.A, self.seq, surv_ids, chain=self.chain, rows=[t])[t]
        feas = np.asarray(self.system.chain_extend_feasible(self.A, self.seq, surv_ids))[t]
        self.tally.count_round(len(surv_ids))
        self.tally.count_independence(len(surv_ids))
        return vals, feas


def find_tstar(A, L, seq, rho, epsilon, oracle, costs, system, f_base=None, search_mode="linear", tally=None):
    """Locate the batch cutoff: (t1, t2, tstar, V_tstar).

    t1 is the first prefix length at which the still-valuable elements
    lost enough cost mass; t2 the first at which accumulated negative
    marginals outweigh an epsilon fraction of the positive ones; the
    batch keeps min(t1, t2) elements.
    """
    tally = Tally() if tally is None else tally
    L_arr = np.fromiter(sorted(set(int(u) for u in L)), dtype=np.intp)
    fA = float(oracle.value(A)) if f_base is None else float(f_base)
    if len(L_arr):
        ext0 = oracle.chain_extension_values(set(A), [], L_arr)[0]
        marg0 = ext0 - fA
    else:
        marg0 = np.empty(0)
    tally.count_round(len(L_arr) + (0 if f_base is not None else 1))
    search = _PrefixSearch(oracle, system, costs, A, fA, seq, L_arr, marg0, rho, epsilon, tally)
    t1, t2, tstar = search.run(search_mode)
    return t1, t2, tstar, list(seq[:tstar])


def _table_view(oracle):
    """(table, shift_mask) when the oracle is dense-table backed."""
    if isinstance(oracle, TableOracle):
        return oracle.table, 0
    if isinstance(oracle, ShiftedOracle) and isinstance(oracle.base_oracle, TableOracle):
        shift = 0
        for u in oracle.T:
            shift |= 1 << u
        return oracle.base_oracle.table, shift
    return None


def _mask_view(system):
    """(indep_table, root_mask) when the system is mask-table backed."""
    root = 0
    inner = system
    if isinstance(inner, Contraction):
        root = MaskSystem._mask_of(inner.root)
        inner = inner.base_system
    if isinstance(inner, MaskSystem):
        return inner.table, root
    return None


def normalize_instance(oracle, system):
    """Rebase small instances onto dense tables.

    Ground sets of at most MASK_LIMIT elements always run from a value
    table and a feasibility table, whichever engine executes them, so
    results cannot depend on whether the compiled kernel is importable.
    Larger instances are returned unchanged.
    """
    if oracle.n <= MASK_LIMIT:
        if isinstance(oracle, ShiftedOracle):
            if not isinstance(oracle.base_oracle, TableOracle):
                oracle = ShiftedOracle(oracle.base_oracle.as_table(), oracle.T)
        elif not isinstance(oracle, TableOracle):
            oracle = oracle.as_table()
        if isinstance(system, Contraction):
            if not isinstance(system.base_system, MaskSystem):
                system = Contraction(as_mask_system(system.base_system), system.root)
        else:
            system = as_mask_system(system)
    return oracle, system


def choose_engine(oracle, system, force_engine=None):
    if force_engine not in (None, "generic", "kernel"):
        raise InputError("force_engine must be None, 'generic' or 'kernel'")
    kernel_ok = (
        _kernels.available()
        and _table_view(oracle) is not None
        and _mask_view(system) is not None
    )
    if force_engine == "kernel":
        if not kernel_ok:
            raise InputError("compiled kernel unavailable for this instance")
        return "kernel"
    if force_engine == "generic":
        return "generic"
    return "kernel" if kernel_ok else "generic"


def rand_batch(params, I, oracle, costs, system, rng, tally=None, force_engine=None):
    """One full accept/reject batch-selection run; returns RandBatchResult."""
    tally = Tally() if tally is None else tally
    oracle, system = normalize_instance(oracle, system)
    engine = choose_engine(oracle, system, force_engine)
    if engine == "kernel":
        return _rand_batch_kernel(params, I, oracle, costs, system, rng, tally)
    return _rand_batch_generic(params, I, oracle, costs, system, rng, tally)


def _rand_batch_generic(params, I, oracle, costs, system, rng, tally):
    I_arr = np.fromiter(sorted(set(int(u) for u in I)), dtype=np.intp)
    f0 = float(oracle.value(set()))
    if len(I_arr):
        ext0 = oracle.chain_extension_values(set(), [], I_arr)[0]
        feas0 = np.asarray(system.extend_feasible(set(), I_arr))
        tally.count_independence(len(I_arr))
        marg0 = ext0 - f0
        sel = feas0 & ((marg0 / costs.c[I_arr]) >= params.rho)
    else:
        marg0 = np.empty(0)
        sel = np.empty(0, dtype=bool)
    tally.count_round(len(I_arr) + 1)
    L_arr = I_arr[sel]
    L_marg = marg0[sel]
    A = set()
    fA = f0
    U = []
    count = 0
    while len(L_arr) and count < params.M:
        seq = get_seq(A, L_arr, system, rng, tally)
        search = _PrefixSearch(
            oracle, system, costs, A, fA, seq, L_arr, L_marg, params.rho, params.epsilon, tally
        )
        t1, t2, tstar = search.run(params.search_mode)
        assert tstar >= 1, "no progress: stopping rules fired at the empty prefix"
        Vt = seq[:tstar]
        U.extend(Vt)
        surv = ~np.isin(L_arr, np.asarray(Vt, dtype=np.intp))
        accept = True if params.p >= 1.0 else bool(rng.random() < params.p)
        if accept:
            if t2 < t1:
                count += 1
            vals, feas = search.refresh_row(tstar, surv)
            A.update(Vt)
            fA = float(search.chain[tstar])
            margins = vals - fA
            keep = feas & ((margins / costs.c[L_arr[surv]]) >= params.rho)
            L_arr = L_arr[surv][keep]
            L_marg = margins[keep]
        else:
            L_arr = L_arr[surv]
            L_marg = L_marg[surv]
    return RandBatchResult(A=A, U=U, L=(int(u) for u in L_arr), count=count, value=fA, start_value=f0)


def _rand_batch_kernel(params, I, oracle, costs, system, rng, tally):
    table, shift = _table_view(oracle)
    indep, root = _mask_view(system)
    I_mask = 0
    for u in set(int(u) for u in I):
        I_mask |= 1 << u
    out = _kernels._ext.rand_batch_masked(
        np.ascontiguousarray(table, dtype=np.float64),
        np.ascontiguousarray(indep, dtype=np.uint8),
        np.ascontiguousarray(costs.c, dtype=np.float64),
        shift,
        root,
        I_mask,
        params.rho,
        params.M,
        params.p,
        params.epsilon,
        1 if params.search_mode == "binary" else 0,
        rng.bit_generator,
    )
    A_mask, U_ids, L_mask, count, fA, f0, queries, rounds, maxq, checks = out
    sub = Tally()
    sub.queries = int(queries)
    sub.rounds = int(rounds)
    sub.max_queries_per_round = int(maxq)
    sub.independence_checks = int(checks)
    tally.absorb(sub)
    A = {u for u in range(oracle.n) if (int(A_mask) >> u) & 1}
    L = {u for u in range(oracle.n) if (int(L_mask) >> u) & 1}
    return RandBatchResult(
        A=A, U=[int(u) for u in U_ids], L=L, count=count, value=fA, start_value=f0
    )
