"""Unconstrained maximization subroutine.

The default method samples a uniformly random subset, which gives a
4-approximation in expectation for non-negative submodular objectives at
constant adaptive depth.  Anything matching the UsmSolver shape can be
plugged in instead.
"""

import numpy as np


class UsmSolver:
    """A pluggable unconstrained maximizer.

    solve_fn(X, oracle, rng, tally) must return (subset-of-X, its value)
    and do its own metric accounting.  claimed_ratio documents the
    method's expected approximation factor; claimed_rounds its adaptive
    depth, as a human-readable note.
    """

    def __init__(self, solve_fn, claimed_ratio, claimed_rounds):
        self._solve_fn = solve_fn
        self.claimed_ratio = float(claimed_ratio)
        self.claimed_rounds = str(claimed_rounds)

    def solve_with_value(self, X, oracle, rng, tally=None):
        S, val = self._solve_fn(X, oracle, rng, tally)
        return S, val

    def solve(self, X, oracle, rng, tally=None):
        S, _ = self._solve_fn(X, oracle, rng, tally)
        return S


def _random_subset(X, oracle, rng, tally=None):
    members = np.fromiter(sorted(set(int(u) for u in X)), dtype=np.intp, count=len(X))
    keep = rng.random(len(members)) < 0.5
    S = set(int(u) for u in members[keep])
    value = float(oracle.value(S))
    if tally is not None:
        tally.count_round(1)
    return S, value


def usm_random_subset(X, oracle, rng, tally=None):
    """Uniform random subset of X (each element kept with probability 1/2).

    Costs exactly one oracle query, the evaluation of the sampled set.
    """
    S, _ = _random_subset(X, oracle, rng, tally)
    return S


RANDOM_SUBSET = UsmSolver(_random_subset, claimed_ratio=4.0, claimed_rounds="one evaluation round")
