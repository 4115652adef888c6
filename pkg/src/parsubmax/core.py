"""Value oracles, query accounting and the round-based batch executor.

The cost model of everything in this package is the value-oracle model:
an algorithm proceeds in *adaptive rounds*, each round submitting a batch
of mutually independent set queries f(S).  Rounds and queries are tracked
by a Tally; independence-oracle calls are tracked in a separate counter
and never contribute to rounds or queries.
"""

import numpy as np

MASK_LIMIT = 20  # largest ground set for which 2^n value tables are built


class InputError(ValueError):
    """Malformed user input (bad parameter, bad file, bad id)."""


def seq_sum(values):
    """Sum in strict left-to-right order.

    Used for every sum whose result feeds a comparison, so that the
    compiled kernel (a plain C loop) and this reference path agree
    bit-for-bit.  np.sum's pairwise reduction would not.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    return float(np.cumsum(values)[-1])


def masked_seq_sum(values, mask):
    """seq_sum over the entries of `values` selected by boolean `mask`."""
    values = np.where(mask, values, 0.0)
    return seq_sum(values)


def subseq(ss, *key):
    """Child SeedSequence obtained by extending the spawn key.

    Deterministic and collision-free: streams for (a,) and (a, b) differ,
    and adding new consumers never perturbs existing ones.
    """
    if not isinstance(ss, np.random.SeedSequence):
        ss = np.random.SeedSequence(ss)
    return np.random.SeedSequence(entropy=ss.entropy, spawn_key=ss.spawn_key + tuple(int(k) for k in key))


def spawn_rng(ss, *key):
    return np.random.default_rng(subseq(ss, *key))


class Tally:
    """Counters for one algorithm run."""

    __slots__ = ("queries", "rounds", "max_queries_per_round", "independence_checks")

    def __init__(self):
        self.queries = 0
        self.rounds = 0
        self.max_queries_per_round = 0
        self.independence_checks = 0

    def count_round(self, nqueries):
        """Record one adaptive round of `nqueries` parallel queries.

        A round with zero queries is a no-op by contract: empty batches
        do not advance the adaptivity clock.
        """
        nqueries = int(nqueries)
        if nqueries == 0:
            return
        self.rounds += 1
        self.queries += nqueries
        if nqueries > self.max_queries_per_round:
            self.max_queries_per_round = nqueries

    def count_independence(self, n=1):
        self.independence_checks += int(n)

    def absorb(self, other):
        """Append a sequential sub-run: rounds and queries both add."""
        self.rounds += other.rounds
        self.queries += other.queries
        self.independence_checks += other.independence_checks
        if other.max_queries_per_round > self.max_queries_per_round:
            self.max_queries_per_round = other.max_queries_per_round

    def absorb_parallel(self, others):
        """Append concurrent branches: rounds advance by the deepest
        branch only, while queries from all branches add up."""
        others = list(others)
        if not others:
            return
        self.rounds += max(t.rounds for t in others)
        for t in others:
            self.queries += t.queries
            self.independence_checks += t.independence_checks
            if t.max_queries_per_round > self.max_queries_per_round:
                self.max_queries_per_round = t.max_queries_per_round

    def as_dict(self):
        return {
            "rounds": self.rounds,
            "queries": self.queries,
            "max_queries_per_round": self.max_queries_per_round,
            "independence_checks": self.independence_checks,
        }


class RunMetrics:
    """Everything one experiment row reports about a single run."""

    __slots__ = ("utility", "rounds", "queries", "max_queries_per_round", "independence_checks", "wall_ms")

    def __init__(self, utility, tally, wall_ms=0):
        self.utility = float(utility)
        self.rounds = tally.rounds
        self.queries = tally.queries
        self.max_queries_per_round = tally.max_queries_per_round
        self.independence_checks = tally.independence_checks
        self.wall_ms = int(wall_ms)


def _as_index_array(S):
    if isinstance(S, np.ndarray):
        return np.sort(S.astype(np.intp))
    return np.fromiter(sorted(S), dtype=np.intp, count=len(S) if hasattr(S, "__len__") else -1)


def prefix_membership(seq, cands):
    """Bool (d+1, m) matrix: cands[j] in seq[:i].

    Chain helpers use this to map "extend by an element the set already
    contains" onto the unextended value / unconditional feasibility.
    """
    d = len(seq)
    pos = {int(v): i for i, v in enumerate(seq)}
    cand_pos = np.array([pos.get(int(u), d + 1) for u in cands], dtype=np.int64)
    return np.arange(d + 1)[:, None] > cand_pos[None, :]


class ValueOracle:
    """A non-negative submodular set function over ids 0..n-1.

    Subclasses implement value(); the batched helpers below have generic
    (slow) defaults that concrete oracles override with vectorized code.
    None of these methods touch a Tally: accounting is the caller's job.
    """

    n = 0

    def value(self, S):
        raise NotImplementedError

    def values(self, sets):
        return [self.value(S) for S in sets]

    def chain_values(self, base, seq, f_base=None):
        """f(base), f(base+seq[:1]), ..., f(base+seq) as an array.

        If f_base is given it is trusted and placed at index 0 so that a
        value computed earlier in the run is never recomputed (keeping one
        consistent float per set within a run).
        """
        out = np.empty(len(seq) + 1, dtype=np.float64)
        cur = set(base)
        out[0] = self.value(cur) if f_base is None else f_base
        for i, v in enumerate(seq):
            cur.add(v)
            out[i + 1] = self.value(cur)
        return out

    def chain_extension_values(self, base, seq, cands, chain=None, rows=None):
        """Matrix [i, j] = f(base | seq[:i] | {cands[j]}).

        `rows` restricts computation to the given prefix indices (other
        rows are returned as NaN); `chain` is the output of chain_values
        and lets implementations reuse f(base|seq[:i]) for members.
        """
        d = len(seq)
        m = len(cands)
        out = np.full((d + 1, m), np.nan)
        which = range(d + 1) if rows is None else rows
        for i in which:
            cur = set(base)
            cur.update(seq[:i])
            for j, u in enumerate(cands):
                if u in cur:
                    out[i, j] = chain[i] if chain is not None else self.value(cur)
                else:
                    out[i, j] = self.value(cur | {u})
        return out

    def as_table(self):
        """Dense 2^n table form, or None when n is too large."""
        if self.n > MASK_LIMIT:
            return None
        masks = np.arange(1 << self.n, dtype=np.int64)
        return TableOracle(self.values_for_masks(masks))

    def values_for_masks(self, masks):
        """f evaluated on bitmask-encoded sets (bit u <=> element u)."""
        masks = np.asarray(masks, dtype=np.int64)
        out = np.empty(masks.shape, dtype=np.float64)
        for idx, mask in enumerate(masks):
            members = [u for u in range(self.n) if (int(mask) >> u) & 1]
            out[idx] = self.value(members)
        return out


class TableOracle(ValueOracle):
    """Oracle backed by a dense 2^n value table.

    Both the compiled kernel and the reference engine read the same table,
    which is what makes their outputs bit-identical on small instances.
    """

    def __init__(self, table):
        table = np.ascontiguousarray(table, dtype=np.float64)
        size = table.shape[0]
        n = int(size).bit_length() - 1
        if size != (1 << n):
            raise InputError("table length must be a power of two")
        self.table = table
        self.n = n

    @staticmethod
    def _mask_of(S):
        mask = 0
        for u in S:
            mask |= 1 << int(u)
        return mask

    def value(self, S):
        return float(self.table[self._mask_of(S)])

    def values(self, sets):
        return [float(self.table[self._mask_of(S)]) for S in sets]

    def chain_values(self, base, seq, f_base=None):
        out = np.empty(len(seq) + 1, dtype=np.float64)
        mask = self._mask_of(base)
        out[0] = self.table[mask] if f_base is None else f_base
        for i, v in enumerate(seq):
            mask |= 1 << int(v)
            out[i + 1] = self.table[mask]
        return out

    def chain_extension_values(self, base, seq, cands, chain=None, rows=None):
        d = len(seq)
        cand_bits = np.array([1 << int(u) for u in cands], dtype=np.int64)
        prefix = np.empty(d + 1, dtype=np.int64)
        prefix[0] = self._mask_of(base)
        for i, v in enumerate(seq):
            prefix[i + 1] = prefix[i] | (1 << int(v))
        out = np.full((d + 1, len(cands)), np.nan)
        which = range(d + 1) if rows is None else rows
        for i in which:
            out[i] = self.table[prefix[i] | cand_bits]
        return out

    def values_for_masks(self, masks):
        return self.table[np.asarray(masks, dtype=np.int64)]

    def as_table(self):
        return self


class ModularOracle(ValueOracle):
    """f(S) = sum of per-element weights; the simplest test function."""

    def __init__(self, weights):
        self.w = np.ascontiguousarray(weights, dtype=np.float64)
        self.n = len(self.w)

    def value(self, S):
        idx = _as_index_array(S)
        return seq_sum(self.w[idx])

    def values_for_masks(self, masks):
        masks = np.asarray(masks, dtype=np.int64)
        bits = (masks[:, None] >> np.arange(self.n)) & 1
        return bits.astype(np.float64) @ self.w


class ShiftedOracle(ValueOracle):
    """g(Y) = f(T | Y); inherits submodularity and non-negativity of f."""

    def __init__(self, oracle, T):
        self.base_oracle = oracle
        self.T = frozenset(int(u) for u in T)
        self.n = oracle.n

    def value(self, S):
        return self.base_oracle.value(self.T | set(int(u) for u in S))

    def chain_values(self, base, seq, f_base=None):
        return self.base_oracle.chain_values(self.T | set(base), seq, f_base=f_base)

    def chain_extension_values(self, base, seq, cands, chain=None, rows=None):
        return self.base_oracle.chain_extension_values(self.T | set(base), seq, cands, chain=chain, rows=rows)

    def values_for_masks(self, masks):
        tmask = 0
        for u in self.T:
            tmask |= 1 << u
        return self.base_oracle.values_for_masks(np.asarray(masks, dtype=np.int64) | tmask)


def shift_oracle(oracle, T):
    if not T:
        return oracle
    return ShiftedOracle(oracle, T)


class RoundExecutor:
    """Evaluates query batches round by round against one oracle.

    Queries inside a batch may be evaluated in any order or concurrently;
    the algorithms only mutate state between rounds, so scheduling can
    never change results.  This implementation defers to the oracle's
    batched evaluator, which is where the actual parallelism (numpy) is.
    """

    def __init__(self, oracle, tally=None):
        self.oracle = oracle
        self.tally = tally if tally is not None else Tally()

    def submit_round(self, batch):
        if len(batch) == 0:
            return []
        vals = self.oracle.values(batch)
        self.tally.count_round(len(batch))
        return [float(v) for v in vals]


def evaluate(executor, S):
    """Single query as a one-element round."""
    return executor.submit_round([S])[0]


def marginal(executor, u, S, f_S=None):
    """f(S|{u}) - f(S).  Two queries, or one when f(S) is supplied."""
    S = set(S)
    if u in S:
        return 0.0
    if f_S is None:
        vals = executor.submit_round([S | {u}, S])
        return vals[0] - vals[1]
    return executor.submit_round([S | {u}])[0] - f_S
