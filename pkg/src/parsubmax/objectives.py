"""Concrete submodular objectives and their cost models.

Four families: weighted directed cut, multi-round influence revenue,
image-collection summarization, and movie recommendation (which reduces
to a cut on a similarity matrix).  Each oracle overrides the chain
helpers from core so a threshold-location round costs O(d*m*inner) numpy
work instead of d*m python-level evaluations.
"""

import numpy as np

from .core import InputError, TableOracle, ValueOracle, prefix_membership, seq_sum
from .constraints import COST_FLOOR, CostModel


def _square_nonneg(W, name="weight matrix"):
    W = np.ascontiguousarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InputError("%s must be square" % name)
    if not np.all(np.isfinite(W)) or np.any(W < 0):
        raise InputError("%s must be finite and non-negative" % name)
    return W


class CutOracle(ValueOracle):
    """f(S) = total weight of arcs leaving S (non-negative W, zero diag).

    Works for directed graphs; feed a symmetric matrix for the undirected
    cut.  Marginal of v given S is rowsum(v) - sum_{x in S} (W[v,x] + W[x,v]),
    which is what the chain helpers exploit.
    """

    def __init__(self, W):
        W = _square_nonneg(W).copy()
        np.fill_diagonal(W, 0.0)
        self.W = W
        self.n = W.shape[0]
        self._rowsum = W.sum(axis=1)

    def value(self, S):
        S = sorted(set(int(u) for u in S))
        if not S:
            return 0.0
        s = np.zeros(self.n)
        s[S] = 1.0
        return float(s @ self.W @ (1.0 - s))

    def chain_values(self, base, seq, f_base=None):
        d = len(seq)
        out = np.empty(d + 1)
        cur = sorted(set(int(u) for u in base))
        s = np.zeros(self.n)
        s[cur] = 1.0
        out[0] = float(s @ self.W @ (1.0 - s)) if f_base is None else f_base
        val = out[0]
        for i, v in enumerate(seq):
            v = int(v)
            val = val + self._rowsum[v] - float(self.W[v] @ s) - float(self.W[:, v] @ s)
            s[v] = 1.0
            out[i + 1] = val
        return out

    def chain_extension_values(self, base, seq, cands, chain=None, rows=None):
        d = len(seq)
        if chain is None:
            chain = self.chain_values(base, seq)
        cands_arr = np.fromiter(cands, dtype=np.intp, count=len(cands))
        seq_arr = np.fromiter(seq, dtype=np.intp, count=d)
        base_arr = np.fromiter(sorted(base), dtype=np.intp, count=len(base))
        # dots[j, i] = sum over x in base|seq[:i] of W[u_j,x] + W[x,u_j]
        dots = np.zeros((len(cands_arr), d + 1))
        if len(base_arr):
            dots[:, 0] = self.W[np.ix_(cands_arr, base_arr)].sum(axis=1)
            dots[:, 0] += self.W[np.ix_(base_arr, cands_arr)].sum(axis=0)
        if d:
            incr = self.W[np.ix_(cands_arr, seq_arr)] + self.W[np.ix_(seq_arr, cands_arr)].T
            dots[:, 1:] = dots[:, :1] + np.cumsum(incr, axis=1)
        out = chain[:, None] + self._rowsum[cands_arr][None, :] - dots.T
        inside = prefix_membership(seq_arr, cands_arr)
        out[inside] = np.broadcast_to(chain[:, None], out.shape)[inside]
        member0 = np.isin(cands_arr, base_arr)
        out[:, member0] = chain[:, None]
        if rows is not None:
            keep = np.zeros(d + 1, dtype=bool)
            keep[np.asarray(rows, dtype=np.intp)] = True
            out[~keep] = np.nan
        return out

    def values_for_masks(self, masks):
        masks = np.asarray(masks, dtype=np.int64)
        out = np.empty(masks.shape[0])
        chunk = 1 << 14
        bits_all = np.arange(self.n, dtype=np.int64)
        for lo in range(0, masks.shape[0], chunk):
            mk = masks[lo : lo + chunk]
            bits = ((mk[:, None] >> bits_all[None, :]) & 1).astype(np.float64)
            lin = bits @ self._rowsum
            quad = ((bits @ self.W) * bits).sum(axis=1)
            out[lo : lo + chunk] = lin - quad
        return out


class RevenueOracle(ValueOracle):
    """Revenue of seeding nodes over t separate rounds.

    Element i*nv + v means "seed node v in round i".  Round value is
    sum over non-seeded nodes u of sqrt(total weight into u from that
    round's seeds); rounds add up.
    """

    def __init__(self, W, t):
        self.W = _square_nonneg(W)
        self.nv = self.W.shape[0]
        self.t = int(t)
        if self.t < 1:
            raise InputError("need at least one round")
        self.n = self.nv * self.t

    def split(self, S):
        per = [set() for _ in range(self.t)]
        for u in S:
            u = int(u)
            per[u // self.nv].add(u % self.nv)
        return per

    def _slice_value(self, infl, members):
        out_mask = np.ones(self.nv, dtype=bool)
        if members:
            out_mask[sorted(members)] = False
        return float(np.sqrt(infl[out_mask]).sum())

    def value(self, S):
        total = 0.0
        for members in self.split(S):
            if not members:
                continue
            infl = self.W[sorted(members)].sum(axis=0)
            total += self._slice_value(infl, members)
        return total

    def _chain_state(self, base, seq):
        """Per-row influence vectors and membership masks, per round."""
        d = len(seq)
        infl = np.zeros((d + 1, self.t, self.nv))
        member = np.zeros((d + 1, self.t, self.nv), dtype=bool)
        for u in base:
            u = int(u)
            i, v = divmod(u, self.nv)
            infl[0, i] += self.W[v]
            member[0, i, v] = True
        for step, u in enumerate(seq):
            i, v = divmod(int(u), self.nv)
            infl[step + 1] = infl[step]
            member[step + 1] = member[step]
            infl[step + 1, i] += self.W[v]
            member[step + 1, i, v] = True
        return infl, member

    def chain_values(self, base, seq, f_base=None):
        infl, member = self._chain_state(base, seq)
        vals = np.where(member, 0.0, np.sqrt(infl)).sum(axis=2)  # (d+1, t)
        out = vals.sum(axis=1)
        if f_base is not None:
            out = out - out[0] + f_base
        return out

    def chain_extension_values(self, base, seq, cands, chain=None, rows=None):
        d = len(seq)
        infl, member = self._chain_state(base, seq)
        sqrt_in = np.where(member, 0.0, np.sqrt(infl))
        slice_val = sqrt_in.sum(axis=2)  # (d+1, t)
        f_chain = slice_val.sum(axis=1)
        if chain is not None:
            # keep values consistent with an externally supplied chain
            f_chain = chain
        which = np.arange(d + 1) if rows is None else np.asarray(rows, dtype=np.intp)
        out = np.full((d + 1, len(cands)), np.nan)
        for j, u in enumerate(cands):
            i, v = divmod(int(u), self.nv)
            new_infl = infl[which, i, :] + self.W[v][None, :]
            new_mem = member[which, i, :].copy()
            new_mem[:, v] = True
            new_val = np.where(new_mem, 0.0, np.sqrt(new_infl)).sum(axis=1)
            out[which, j] = f_chain[which] - slice_val[which, i] + new_val
        inside = prefix_membership(list(seq), list(cands))
        basemem = np.isin(
            np.fromiter(cands, dtype=np.int64, count=len(cands)),
            np.fromiter(base, dtype=np.int64, count=len(base)),
        )
        inside |= basemem[None, :]
        grid = np.broadcast_to(f_chain[:, None], out.shape)
        out[inside] = grid[inside]
        if rows is not None:
            keep = np.zeros(d + 1, dtype=bool)
            keep[which] = True
            out[~keep] = np.nan
        return out


class ImageOracle(ValueOracle):
    """Coverage-minus-redundancy summarization over a similarity matrix.

    f(S) = sum_u max_{v in S} s[u,v] - (1/n) * sum_{u,v in S} s[u,v],
    with the empty max taken as 0.
    """

    def __init__(self, sim):
        self.S = _square_nonneg(sim, "similarity matrix")
        self.n = self.S.shape[0]

    def value(self, X):
        X = sorted(set(int(u) for u in X))
        if not X:
            return 0.0
        cover = self.S[:, X].max(axis=1).sum()
        penalty = self.S[np.ix_(X, X)].sum() / self.n
        return float(cover - penalty)

    def _chain_state(self, base, seq):
        d = len(seq)
        best = np.zeros((d + 1, self.n))
        pen = np.zeros(d + 1)
        cur = sorted(set(int(u) for u in base))
        if cur:
            best[0] = self.S[:, cur].max(axis=1)
            pen[0] = self.S[np.ix_(cur, cur)].sum() / self.n
        members = set(cur)
        for i, v in enumerate(seq):
            v = int(v)
            idx = sorted(members)
            cross = self.S[v, idx].sum() + self.S[idx, v].sum() if idx else 0.0
            pen[i + 1] = pen[i] + (cross + self.S[v, v]) / self.n
            best[i + 1] = np.maximum(best[i], self.S[:, v])
            members.add(v)
        return best, pen

    def chain_values(self, base, seq, f_base=None):
        best, pen = self._chain_state(base, seq)
        out = best.sum(axis=1) - pen
        if f_base is not None:
            out = out - out[0] + f_base
        return out

    def chain_extension_values(self, base, seq, cands, chain=None, rows=None):
        d = len(seq)
        best, pen = self._chain_state(base, seq)
        if chain is None:
            chain = best.sum(axis=1) - pen
        cands_arr = np.fromiter(cands, dtype=np.intp, count=len(cands))
        seq_arr = np.fromiter(seq, dtype=np.intp, count=d)
        base_arr = np.fromiter(sorted(base), dtype=np.intp, count=len(base))
        # pairwise penalty increments, cumulated along the chain
        cross = np.zeros((len(cands_arr), d + 1))
        if len(base_arr):
            cross[:, 0] = self.S[np.ix_(cands_arr, base_arr)].sum(axis=1)
            cross[:, 0] += self.S[np.ix_(base_arr, cands_arr)].sum(axis=0)
        if d:
            incr = self.S[np.ix_(cands_arr, seq_arr)] + self.S[np.ix_(seq_arr, cands_arr)].T
            cross[:, 1:] = cross[:, :1] + np.cumsum(incr, axis=1)
        pen_new = pen[None, :] + (cross + np.diag(self.S)[cands_arr][:, None]) / self.n
        which = np.arange(d + 1) if rows is None else np.asarray(rows, dtype=np.intp)
        out = np.full((d + 1, len(cands_arr)), np.nan)
        for j, u in enumerate(cands_arr):
            cover = np.maximum(best[which], self.S[:, u][None, :]).sum(axis=1)
            out[which, j] = cover - pen_new[j, which]
        inside = prefix_membership(seq_arr, cands_arr)
        inside |= np.isin(cands_arr, base_arr)[None, :]
        grid = np.broadcast_to(np.asarray(chain)[:, None], out.shape)
        out[inside] = grid[inside]
        if rows is not None:
            keep = np.zeros(d + 1, dtype=bool)
            keep[which] = True
            out[~keep] = np.nan
        return out


def movie_similarity(qvecs, lam=2.0):
    """Similarity exp(-lam * euclidean distance) between rating profiles."""
    q = np.ascontiguousarray(qvecs, dtype=np.float64)
    if q.ndim != 2:
        raise InputError("rating profiles must be a 2-d array")
    sq = (q * q).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (q @ q.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-lam * np.sqrt(d2))


def movie_oracle(qvecs, lam=2.0):
    """Diversity objective sum_{u in S, v not in S} s[u,v]: a cut on the
    similarity matrix, so it reuses the cut oracle wholesale."""
    return CutOracle(movie_similarity(qvecs, lam))


def revenue_costs(W, t, mu=0.2):
    """Cost of seeding a node: 1 - exp(-mu * sqrt(out-weight)).

    Isolated nodes are floored at a tiny positive cost so every cost is
    strictly positive.  No normalization; budgets are set by the caller.
    """
    W = _square_nonneg(W)
    out_w = np.sqrt(W.sum(axis=1))
    c = 1.0 - np.exp(-mu * out_w)
    c = np.maximum(c, COST_FLOOR)
    return CostModel(np.tile(c, int(t)))


def movie_costs(ratings):
    """Costs proportional to 10 - rating, normalized to mean 1."""
    r = np.ascontiguousarray(ratings, dtype=np.float64)
    raw = np.maximum(10.0 - r, COST_FLOOR)
    return CostModel(raw / raw.mean())


def image_costs(pixel_std):
    """Costs proportional to per-image pixel spread, normalized to mean 1."""
    s = np.ascontiguousarray(pixel_std, dtype=np.float64)
    raw = np.maximum(s, COST_FLOOR)
    return CostModel(raw / raw.mean())


def brute_force_opt(oracle, system, costs=None):
    """Exact maximum of f over feasible sets, by enumeration (n <= 20).

    Feasible means independent in `system` and, when `costs` is given,
    within its budget as well.  Ties break toward the smallest bitmask
    so the reported set is deterministic.  Returns (value, set).
    """
    table = oracle.as_table()
    if table is None:
        raise InputError("brute force needs n <= 20")
    feas = system.mask_table()
    if feas is None:
        raise InputError("brute force needs a mask table for the constraint")
    ok = feas.astype(bool)
    if costs is not None:
        n = oracle.n
        masks = np.arange(1 << n, dtype=np.int64)
        total = np.zeros(1 << n)
        for u in range(n):
            total += np.where((masks >> u) & 1, costs.c[u], 0.0)
        ok &= total <= costs.B
    vals = np.where(ok, table.table, -np.inf)
    best = int(np.argmax(vals))
    members = {u for u in range(oracle.n) if (best >> u) & 1}
    return float(table.table[best]), members
