"""Batch threshold selection: sequencing, cutoff location, accept loop."""

import numpy as np
import pytest

from parsubmax.constraints import (
    CostModel,
    Knapsack,
    build_cardinality,
    build_partition_matroid,
    unit_costs,
)
from parsubmax.core import InputError, ModularOracle, Tally, spawn_rng
from parsubmax.objectives import CutOracle
from parsubmax.randbatch import (
    RandBatchParams,
    RandBatchResult,
    find_tstar,
    get_seq,
    rand_batch,
)


def ones4():
    return ModularOracle(np.ones(4)), unit_costs(4), build_cardinality(4, 4)


def random_knapsack(irng, n=10, density=0.6, frac=0.6):
    from parsubmax.harness.data import gen_cut_weights
    oracle = CutOracle(gen_cut_weights(n, irng, density=density))
    c = 0.5 + irng.random(n)
    costs = CostModel(c, B=float(c.sum()) * frac)
    return oracle, costs, Knapsack(costs)


def test_params_validation():
    good = RandBatchParams(rho=0.5, M=3, p=0.5, epsilon=0.2, search_mode="binary")
    assert good.M == 3 and good.search_mode == "binary"
    with pytest.raises(InputError):
        RandBatchParams(rho=0.0, M=1)
    with pytest.raises(InputError):
        RandBatchParams(rho=1.0, M=0)
    with pytest.raises(InputError):
        RandBatchParams(rho=1.0, M=1.5)
    with pytest.raises(InputError):
        RandBatchParams(rho=1.0, M=1, p=0.0)
    with pytest.raises(InputError):
        RandBatchParams(rho=1.0, M=1, p=1.1)
    with pytest.raises(InputError):
        RandBatchParams(rho=1.0, M=1, epsilon=1.0)
    with pytest.raises(InputError):
        RandBatchParams(rho=1.0, M=1, search_mode="bogus")


def test_get_seq_empty_pool():
    assert get_seq(set(), set(), build_cardinality(3, 2), spawn_rng(0)) == []


def test_get_seq_free_system_returns_permutation():
    V = get_seq(set(), {0, 1, 2}, build_cardinality(3, 3), spawn_rng(71))
    assert sorted(V) == [0, 1, 2]


def test_get_seq_partition_outcomes():
    system = build_partition_matroid([0, 0, 1], {0: 1, 1: 1})
    firsts = set()
    for seed in range(40):
        V = get_seq(set(), {0, 1, 2}, system, spawn_rng(72, seed))
        assert len(V) == 2 and 2 in V
        assert V.count(0) + V.count(1) == 1
        firsts.add(V[0])
        assert V == get_seq(set(), {0, 1, 2}, system, spawn_rng(72, seed))
    assert firsts == {0, 1, 2}


def test_get_seq_maximal_and_uses_no_queries():
    rng = spawn_rng(73)
    for trial in range(20):
        n = int(rng.integers(4, 10))
        labels = [int(x) for x in rng.integers(0, 3, n)]
        caps = {g: int(rng.integers(0, 3)) for g in range(3)}
        system = build_partition_matroid(labels, caps)
        A = set()
        tally = Tally()
        V = get_seq(A, set(range(n)), system, spawn_rng(74, trial), tally=tally)
        assert tally.queries == 0 and tally.rounds == 0
        assert tally.independence_checks > 0 or n == 0
        assert system.is_independent(A | set(V))
        for u in set(range(n)) - set(V):
            assert not system.is_independent(A | set(V) | {u})


def test_get_seq_respects_existing_base():
    system = build_cardinality(5, 2)
    V = get_seq({4}, {0, 1, 2}, system, spawn_rng(75))
    assert len(V) == 1


def test_get_seq_check_accounting():
    # one pass, everything feasible: min(s+1, len(pool)) checks, no rest
    tally = Tally()
    get_seq(set(), {0, 1, 2}, build_cardinality(3, 3), spawn_rng(76), tally=tally)
    assert tally.independence_checks == 3


def test_find_tstar_empty_sequence():
    f, costs, system = ones4()
    assert find_tstar(set(), [], [], 0.5, 0.1, f, costs, system) == (0, 0, 0, [])


def test_find_tstar_hand_traced_example():
    # all marginals 1, unit costs, free cardinality: the cost rule fires
    # at the first prefix, the damage rule only at the end
    f, costs, system = ones4()
    seq = [2, 0, 3, 1]
    tally = Tally()
    out = find_tstar(set(), [0, 1, 2, 3], seq, 0.5, 0.1, f, costs, system,
                     search_mode="linear", tally=tally)
    assert out == (1, 4, 1, [2])
    assert tally.as_dict() == {"rounds": 2, "queries": 29,
                               "max_queries_per_round": 24, "independence_checks": 16}
    cached = Tally()
    out2 = find_tstar(set(), [0, 1, 2, 3], seq, 0.5, 0.1, f, costs, system,
                      f_base=0.0, search_mode="linear", tally=cached)
    assert out2 == out
    assert cached.queries == 28  # supplied f(A) saves the bootstrap query


def test_find_tstar_binary_agrees_with_linear():
    f, costs, system = ones4()
    seq = [2, 0, 3, 1]
    tally = Tally()
    out = find_tstar(set(), [0, 1, 2, 3], seq, 0.5, 0.1, f, costs, system,
                     search_mode="binary", tally=tally)
    assert out == (1, 4, 1, [2])
    # bisection pays per-step rounds but fewer queries overall
    assert tally.as_dict() == {"rounds": 4, "queries": 21,
                               "max_queries_per_round": 8, "independence_checks": 12}


def test_find_tstar_modes_agree_on_random_instances():
    for seed in range(25):
        irng = spawn_rng(77, seed)
        oracle, costs, system = random_knapsack(irng)
        dens = max(oracle.value({u}) / costs.c[u] for u in range(10))
        rho = 0.3 * dens
        if rho <= 0:
            continue
        margins = np.array([oracle.value({u}) for u in range(10)])
        L = [u for u in range(10) if margins[u] / costs.c[u] >= rho
             and system.is_independent({u})]
        if not L:
            continue
        seq = get_seq(set(), L, system, spawn_rng(78, seed))
        lin = find_tstar(set(), L, seq, rho, 0.25, oracle, costs, system, search_mode="linear")
        binr = find_tstar(set(), L, seq, rho, 0.25, oracle, costs, system, search_mode="binary")
        assert lin == binr
        assert 1 <= lin[2] <= len(seq)


def test_rand_batch_empty_input():
    f, costs, system = ones4()
    res = rand_batch(RandBatchParams(rho=0.5, M=2), set(), f, costs, system, spawn_rng(79))
    assert (res.A, res.U, res.L, res.count) == (set(), [], set(), 0)
    assert res.value == res.start_value == 0.0


def test_rand_batch_threshold_above_everything():
    f, costs, system = ones4()
    res = rand_batch(RandBatchParams(rho=5.0, M=2), range(4), f, costs, system, spawn_rng(80))
    assert res.A == set() and res.U == [] and res.L == set()


def test_rand_batch_hand_traced_example():
    f, costs, system = ones4()
    params = RandBatchParams(rho=0.5, M=100, p=1.0, epsilon=0.1)
    tally = Tally()
    res = rand_batch(params, range(4), f, costs, system, spawn_rng(70),
                     tally=tally, force_engine="generic")
    assert res.A == {0, 1, 2, 3}
    assert sorted(res.U) == [0, 1, 2, 3]
    assert res.L == set() and res.count == 0
    assert res.value == 4.0 and res.start_value == 0.0
    # one element accepted per iteration: 4 threshold-location rounds
    assert tally.as_dict() == {"rounds": 5, "queries": 55,
                               "max_queries_per_round": 24, "independence_checks": 44}


def test_rand_batch_output_invariants():
    for seed in range(30):
        irng = spawn_rng(81, seed)
        oracle, costs, system = random_knapsack(irng)
        dens = max(oracle.value({u}) / costs.c[u] for u in range(10))
        params = RandBatchParams(rho=0.3 * dens, M=2, p=0.5, epsilon=0.25)
        res = rand_batch(params, range(10), oracle, costs, system, spawn_rng(82, seed))
        assert system.is_independent(res.A)
        assert res.A <= set(res.U)
        assert len(set(res.U)) == len(res.U)
        assert res.L.isdisjoint(res.U)
        assert res.value == pytest.approx(oracle.value(res.A))
        assert res.start_value == 0.0
        if res.L:
            assert res.count == params.M
            # leftovers are still valuable relative to the final A
            for u in res.L:
                gain = oracle.value(res.A | {u}) - oracle.value(res.A)
                assert gain / costs.c[u] >= params.rho - 1e-12


def test_rand_batch_modes_and_seeds_are_deterministic():
    for seed in range(15):
        irng = spawn_rng(83, seed)
        oracle, costs, system = random_knapsack(irng)
        dens = max(oracle.value({u}) / costs.c[u] for u in range(10))
        outs = []
        for mode in ("linear", "binary"):
            params = RandBatchParams(rho=0.4 * dens, M=3, p=0.5, epsilon=0.2,
                                     search_mode=mode)
            res = rand_batch(params, range(10), oracle, costs, system, spawn_rng(84, seed))
            outs.append((sorted(res.A), res.U, sorted(res.L), res.count, res.value))
        assert outs[0] == outs[1]


def test_rand_batch_rejects_bad_engine_requests():
    f, costs, system = ones4()
    params = RandBatchParams(rho=0.5, M=1)
    with pytest.raises(InputError):
        rand_batch(params, range(4), f, costs, system, spawn_rng(0), force_engine="fast")
    big_costs = unit_costs(25, B=5.0)
    big = Knapsack(big_costs)
    with pytest.raises(InputError):
        rand_batch(RandBatchParams(rho=0.1, M=1), range(25), ModularOracle(np.ones(25)),
                   big_costs, big, spawn_rng(0), force_engine="kernel")


def test_result_container_normalizes_types():
    res = RandBatchResult(A=[1, 1, 2], U=(2, 1), L=(u for u in [3]),
                          count=np.int64(1), value=np.float64(2.0), start_value=0)
    assert res.A == {1, 2} and res.U == [2, 1] and res.L == {3}
    assert isinstance(res.count, int) and isinstance(res.value, float)
