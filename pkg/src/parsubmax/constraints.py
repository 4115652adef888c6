"""Downward-closed independence systems and cost models.

Every system answers is_independent(X) for arbitrary X and declares a
k-system parameter.  Feasibility calls are cheap set arithmetic; the
batch engines additionally use the vectorized chain helpers so that a
threshold-location round over a d x m grid of candidate extensions does
not pay d*m Python calls.
"""

import warnings

import numpy as np

from .core import InputError, prefix_membership, seq_sum

COST_FLOOR = 1e-9


class CostModel:
    """Positive per-element costs plus an optional budget B."""

    def __init__(self, c, B=None):
        self.c = np.ascontiguousarray(c, dtype=np.float64)
        if np.any(self.c <= 0) or not np.all(np.isfinite(self.c)):
            raise InputError("costs must be positive and finite")
        if B is not None:
            B = float(B)
            if B <= 0:
                raise InputError("budget must be positive")
        self.B = B
        self.n = len(self.c)

    def with_budget(self, B):
        return CostModel(self.c, B)

    def cost(self, u):
        return float(self.c[u])

    def total(self, X):
        """Cost of a set, summed in ascending-id order (see core.seq_sum)."""
        idx = np.fromiter(sorted(X), dtype=np.intp, count=len(X))
        return seq_sum(self.c[idx])


def unit_costs(n, B=None):
    return CostModel(np.ones(n), B)


class IndependenceSystem:
    """Base class: a downward-closed family containing the empty set.

    k is the declared k-system parameter. Systems whose k is a formal
    placeholder (knapsack) set k_unbounded so callers that rely on a
    bounded k can refuse them instead of silently computing nonsense.
    """

    k = 1
    k_unbounded = False
    is_matroid = False
    r_hint = None

    def __init__(self, n):
        self.n = n

    def is_independent(self, X):
        raise NotImplementedError

    def extend_feasible(self, base, cands):
        """Boolean array: base | {u} independent, per candidate u.

        base must be independent and disjoint from cands.
        """
        return np.array([self.is_independent(set(base) | {u}) for u in cands], dtype=bool)

    def chain_extend_feasible(self, base, seq, cands):
        """Matrix [i, j]: base | seq[:i] | {cands[j]} independent.

        Candidates already inside the prefix count as feasible (adding
        them changes nothing).  base | seq[:i] itself is assumed
        independent for every i, which the batch engine guarantees.
        """
        d = len(seq)
        out = np.empty((d + 1, len(cands)), dtype=bool)
        cur = set(base)
        for i in range(d + 1):
            if i > 0:
                cur.add(seq[i - 1])
            out[i] = [u in cur or self.is_independent(cur | {u}) for u in cands]
        return out

    def mask_table(self):
        """uint8 feasibility over all 2^n subsets (n <= 20 only)."""
        if self.n > 20:
            return None
        size = 1 << self.n
        out = np.empty(size, dtype=np.uint8)
        for mask in range(size):
            members = [u for u in range(self.n) if (mask >> u) & 1]
            out[mask] = self.is_independent(members)
        return out


class TrivialSystem(IndependenceSystem):
    """Every subset independent (the unconstrained case)."""

    is_matroid = True

    def is_independent(self, X):
        return True

    def extend_feasible(self, base, cands):
        return np.ones(len(cands), dtype=bool)

    def chain_extend_feasible(self, base, seq, cands):
        return np.ones((len(seq) + 1, len(cands)), dtype=bool)

    def mask_table(self):
        if self.n > 20:
            return None
        return np.ones(1 << self.n, dtype=np.uint8)


class Knapsack(IndependenceSystem):
    """X independent iff c(X) <= B.

    Declared k is n (a knapsack is not a bounded k-system in general) and
    flagged unbounded; nothing in the solvers consumes it.
    """

    k_unbounded = True

    def __init__(self, costs):
        if costs.B is None:
            raise InputError("knapsack needs a budget")
        super().__init__(costs.n)
        self.costs = costs
        self.k = costs.n

    def is_independent(self, X):
        return self.costs.total(X) <= self.costs.B

    def extend_feasible(self, base, cands):
        base_cost = self.costs.total(base)
        cands = np.fromiter(cands, dtype=np.intp, count=len(cands))
        return base_cost + self.costs.c[cands] <= self.costs.B

    def chain_extend_feasible(self, base, seq, cands):
        c = self.costs.c
        base_cost = self.costs.total(base)
        prefix = np.empty(len(seq) + 1)
        prefix[0] = base_cost
        if len(seq):
            # same left-to-right accumulation as a C loop
            prefix[1:] = base_cost + np.cumsum(c[np.fromiter(seq, dtype=np.intp, count=len(seq))])
        cands = np.fromiter(cands, dtype=np.intp, count=len(cands))
        ok = prefix[:, None] + c[cands][None, :] <= self.costs.B
        return ok | prefix_membership(seq, cands)

    def mask_table(self):
        if self.n > 20:
            return None
        # totals[m] = totals[m without top bit] + c[top bit], which is the
        # same ascending-id accumulation order as CostModel.total
        totals = np.zeros(1 << self.n)
        for h in range(self.n):
            totals[1 << h : 1 << (h + 1)] = totals[: 1 << h] + self.costs.c[h]
        return (totals <= self.costs.B).astype(np.uint8)


class Cardinality(IndependenceSystem):
    """X independent iff |X| <= m.  A matroid, so k=1."""

    is_matroid = True

    def __init__(self, n, m):
        if m < 0:
            raise InputError("cardinality cap must be >= 0")
        super().__init__(n)
        self.m = int(m)
        self.r_hint = min(n, self.m)

    def is_independent(self, X):
        return len(set(X)) <= self.m

    def extend_feasible(self, base, cands):
        ok = len(set(base)) + 1 <= self.m
        return np.full(len(cands), ok, dtype=bool)

    def chain_extend_feasible(self, base, seq, cands):
        b = len(set(base))
        sizes = b + 1 + np.arange(len(seq) + 1)  # |base| + i + 1
        out = np.repeat((sizes <= self.m)[:, None], len(cands), axis=1)
        return out | prefix_membership(seq, cands)

    def mask_table(self):
        if self.n > 20:
            return None
        masks = np.arange(1 << self.n, dtype=np.int64)
        pc = np.zeros(1 << self.n, dtype=np.int64)
        for u in range(self.n):
            pc += (masks >> u) & 1
        return (pc <= self.m).astype(np.uint8)


class PartitionMatroid(IndependenceSystem):
    """Per-group caps plus an optional cap on the total size.  k=1."""

    is_matroid = True

    def __init__(self, labels, caps, total_cap=None):
        labels = np.asarray(labels, dtype=np.intp)
        super().__init__(len(labels))
        self.labels = labels
        groups = sorted(set(int(g) for g in labels))
        for g in groups:
            if g not in caps:
                raise InputError("missing cap for group %r" % g)
            if caps[g] < 0:
                raise InputError("caps must be >= 0")
        self.caps = {int(g): int(caps[g]) for g in groups}
        self.total_cap = None if total_cap is None else int(total_cap)
        cap_sum = sum(self.caps.values())
        self.r_hint = cap_sum if self.total_cap is None else min(cap_sum, self.total_cap)
        # dense relabeling for the vectorized paths
        self._gid = {g: i for i, g in enumerate(groups)}
        self._dense = np.array([self._gid[int(g)] for g in labels], dtype=np.intp)
        self._caps_arr = np.array([self.caps[g] for g in groups], dtype=np.int64)

    def is_independent(self, X):
        X = set(X)
        if self.total_cap is not None and len(X) > self.total_cap:
            return False
        counts = {}
        for u in X:
            g = int(self.labels[u])
            counts[g] = counts.get(g, 0) + 1
            if counts[g] > self.caps[g]:
                return False
        return True

    def extend_feasible(self, base, cands):
        base = set(base)
        counts = np.zeros(len(self._caps_arr), dtype=np.int64)
        for u in base:
            counts[self._dense[u]] += 1
        cands = np.fromiter(cands, dtype=np.intp, count=len(cands))
        ok = counts[self._dense[cands]] + 1 <= self._caps_arr[self._dense[cands]]
        if self.total_cap is not None:
            ok &= len(base) + 1 <= self.total_cap
        return ok

    def chain_extend_feasible(self, base, seq, cands):
        d = len(seq)
        ngroups = len(self._caps_arr)
        counts = np.zeros((d + 1, ngroups), dtype=np.int64)
        for u in set(base):
            counts[0, self._dense[u]] += 1
        for i, v in enumerate(seq):
            counts[i + 1] = counts[i]
            counts[i + 1, self._dense[v]] += 1
        cands_arr = np.fromiter(cands, dtype=np.intp, count=len(cands))
        cg = self._dense[cands_arr]
        ok = counts[:, cg] + 1 <= self._caps_arr[cg][None, :]
        if self.total_cap is not None:
            sizes = len(set(base)) + 1 + np.arange(d + 1)
            ok &= (sizes <= self.total_cap)[:, None]
        return ok | prefix_membership(seq, cands_arr)


class LabelSystem(IndependenceSystem):
    """Elements carry one or more labels; per-label caps plus a total cap.

    With overlapping labels this is not a matroid; it is a k-system with
    k at most the number of distinct labels.
    """

    def __init__(self, label_sets, caps, total_cap):
        super().__init__(len(label_sets))
        self.label_sets = [frozenset(int(g) for g in ls) for ls in label_sets]
        for ls in self.label_sets:
            if not ls:
                raise InputError("every element needs at least one label")
        labels = sorted(set().union(*self.label_sets))
        for g in labels:
            if g not in caps:
                raise InputError("missing cap for label %r" % g)
        self.caps = {int(g): int(caps[g]) for g in labels}
        self.total_cap = int(total_cap)
        self.k = len(labels)
        self.r_hint = min(self.total_cap, sum(self.caps.values()))
        gid = {g: i for i, g in enumerate(labels)}
        self._inc = np.zeros((self.n, len(labels)), dtype=np.int64)
        for u, ls in enumerate(self.label_sets):
            for g in ls:
                self._inc[u, gid[g]] = 1
        self._caps_arr = np.array([self.caps[g] for g in labels], dtype=np.int64)

    def is_independent(self, X):
        X = set(X)
        if len(X) > self.total_cap:
            return False
        counts = {}
        for u in X:
            for g in self.label_sets[u]:
                counts[g] = counts.get(g, 0) + 1
                if counts[g] > self.caps[g]:
                    return False
        return True

    def extend_feasible(self, base, cands):
        base = set(base)
        counts = self._inc[sorted(base)].sum(axis=0) if base else np.zeros_like(self._caps_arr)
        cands = np.fromiter(cands, dtype=np.intp, count=len(cands))
        # candidate u is blocked iff it carries any label already at cap
        full = counts >= self._caps_arr
        ok = (self._inc[cands] @ full.astype(np.int64)) == 0
        if len(base) + 1 > self.total_cap:
            ok &= False
        return ok

    def chain_extend_feasible(self, base, seq, cands):
        d = len(seq)
        base = set(base)
        counts = np.zeros((d + 1, len(self._caps_arr)), dtype=np.int64)
        counts[0] = self._inc[sorted(base)].sum(axis=0) if base else 0
        if d:
            counts[1:] = counts[0] + np.cumsum(self._inc[np.asarray(seq, dtype=np.intp)], axis=0)
        full = counts >= self._caps_arr[None, :]
        cands_arr = np.fromiter(cands, dtype=np.intp, count=len(cands))
        ok = (full.astype(np.int64) @ self._inc[cands_arr].T) == 0
        sizes = len(base) + 1 + np.arange(d + 1)
        ok &= (sizes <= self.total_cap)[:, None]
        return ok | prefix_membership(seq, cands_arr)


class Intersection(IndependenceSystem):
    """Independent iff independent in every constituent system."""

    def __init__(self, systems):
        systems = list(systems)
        if not systems:
            raise InputError("intersection needs at least one system")
        n = systems[0].n
        if any(s.n != n for s in systems):
            raise InputError("systems must share a ground set")
        super().__init__(n)
        self.systems = systems
        if any(s.k_unbounded for s in systems):
            self.k = n
            self.k_unbounded = True
        elif all(s.is_matroid for s in systems):
            self.k = sum(s.k for s in systems)
        else:
            self.k = 1
            for s in systems:
                self.k *= s.k
            warnings.warn("intersection of non-matroid systems: declared k is only a product bound")
        hints = [s.r_hint for s in systems if s.r_hint is not None]
        self.r_hint = min(hints) if hints else None

    def is_independent(self, X):
        X = set(X)
        return all(s.is_independent(X) for s in self.systems)

    def extend_feasible(self, base, cands):
        ok = self.systems[0].extend_feasible(base, cands)
        for s in self.systems[1:]:
            ok = ok & s.extend_feasible(base, cands)
        return ok

    def chain_extend_feasible(self, base, seq, cands):
        ok = self.systems[0].chain_extend_feasible(base, seq, cands)
        for s in self.systems[1:]:
            ok = ok & s.chain_extend_feasible(base, seq, cands)
        return ok


class MaskSystem(IndependenceSystem):
    """Feasibility read off a precomputed 2^n table.

    The compiled kernel answers independence questions from exactly this
    table, so running the reference engine against a MaskSystem makes the
    two engines' feasibility decisions identical bit for bit.
    """

    def __init__(self, table, source=None):
        table = np.ascontiguousarray(table, dtype=np.uint8)
        n = int(table.shape[0]).bit_length() - 1
        if table.shape[0] != (1 << n):
            raise InputError("table length must be a power of two")
        super().__init__(n)
        self.table = table
        if source is not None:
            self.k = source.k
            self.k_unbounded = source.k_unbounded
            self.is_matroid = source.is_matroid
            self.r_hint = source.r_hint

    @staticmethod
    def _mask_of(X):
        mask = 0
        for u in X:
            mask |= 1 << int(u)
        return mask

    def is_independent(self, X):
        return bool(self.table[self._mask_of(X)])

    def extend_feasible(self, base, cands):
        bm = self._mask_of(base)
        bits = np.array([1 << int(u) for u in cands], dtype=np.int64)
        return self.table[bm | bits].astype(bool)

    def chain_extend_feasible(self, base, seq, cands):
        prefix = np.empty(len(seq) + 1, dtype=np.int64)
        prefix[0] = self._mask_of(base)
        for i, v in enumerate(seq):
            prefix[i + 1] = prefix[i] | (1 << int(v))
        bits = np.array([1 << int(u) for u in cands], dtype=np.int64)
        # a candidate inside the prefix ORs to the prefix mask itself,
        # which is independent by construction, so no fix-up is needed
        return self.table[prefix[:, None] | bits[None, :]].astype(bool)

    def mask_table(self):
        return self.table


def as_mask_system(system):
    """Table-backed equivalent of a system, or the system itself when its
    ground set is too large to tabulate."""
    if isinstance(system, MaskSystem):
        return system
    table = system.mask_table()
    if table is None:
        return system
    return MaskSystem(table, source=system)


class Contraction(IndependenceSystem):
    """The system X -> is_independent(root | X), for a fixed feasible root.

    Used when a solution T is being extended phase by phase: a batch is
    feasible for the contraction exactly when T plus the batch is
    feasible in the base system.
    """

    def __init__(self, base_system, root):
        super().__init__(base_system.n)
        self.base_system = base_system
        self.root = frozenset(int(u) for u in root)
        self.k = base_system.k
        self.k_unbounded = base_system.k_unbounded
        self.is_matroid = base_system.is_matroid

    def is_independent(self, X):
        return self.base_system.is_independent(self.root | set(X))

    def extend_feasible(self, base, cands):
        return self.base_system.extend_feasible(self.root | set(base), cands)

    def chain_extend_feasible(self, base, seq, cands):
        return self.base_system.chain_extend_feasible(self.root | set(base), seq, cands)


def build_knapsack(costs):
    return Knapsack(costs)


def build_cardinality(n, m):
    return Cardinality(n, m)


def build_partition_matroid(labels, caps, total_cap=None):
    return PartitionMatroid(labels, caps, total_cap)


def build_intersection(systems):
    return Intersection(systems)


def build_label_system(label_sets, caps, total_cap):
    return LabelSystem(label_sets, caps, total_cap)


def verify_k_parameter(system, n, k_claim):
    """Brute-force check of the k-system base-ratio bound.

    Enumerates every Y subseteq {0..n-1}, finds all bases of Y (maximal
    independent subsets), and verifies max|base| <= k_claim * min|base|.
    Exponential: refuses n > 12.
    """
    if n > 12:
        raise InputError("verify_k_parameter is exponential; n must be <= 12")
    if k_claim < 1:
        return False
    table = system.mask_table()
    if table is None:
        table = np.array(
            [system.is_independent([u for u in range(n) if (m >> u) & 1]) for m in range(1 << n)],
            dtype=np.uint8,
        )
    bit = [1 << u for u in range(n)]
    for y in range(1 << n):
        members = [u for u in range(n) if (y >> u) & 1]
        lo, hi = n + 1, 0
        # iterate subsets x of y
        x = y
        while True:
            if table[x]:
                maximal = True
                for u in members:
                    if not (x & bit[u]) and table[x | bit[u]]:
                        maximal = False
                        break
                if maximal:
                    size = bin(x).count("1")
                    lo = min(lo, size)
                    hi = max(hi, size)
            if x == 0:
                break
            x = (x - 1) & y
        # downward closure forces lo >= 1 whenever hi >= 1
        if hi > 0 and hi > k_claim * lo:
            return False
    return True


def check_downward_closure(system, rng, trials=1000):
    """Sampled downward-closure test: random independent X, random Y subset X."""
    n = system.n
    if not system.is_independent(set()):
        return False
    for _ in range(trials):
        X = {u for u in range(n) if rng.random() < 0.5}
        # walk down to an independent set, then test a random subset
        while not system.is_independent(X):
            X.discard(int(rng.choice(sorted(X))))
        if X:
            Y = {u for u in X if rng.random() < 0.5}
            if not system.is_independent(Y):
                return False
    return True
