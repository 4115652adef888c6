"""k-system solver: acceptance probability, schedule, phase loop."""

import math

import numpy as np
import pytest

import parsubmax.parssp as parssp_mod
from parsubmax.constraints import (
    Cardinality,
    Intersection,
    Knapsack,
    build_cardinality,
    build_partition_matroid,
    unit_costs,
)
from parsubmax.core import InputError, ModularOracle, Tally, spawn_rng
from parsubmax.harness.data import gen_cut_weights
from parsubmax.objectives import CutOracle
from parsubmax.parssp import (
    SspConfig,
    ThresholdSchedule,
    default_p,
    effective_r,
    par_ssp,
)
from parsubmax.randbatch import rand_batch


def test_default_p():
    assert default_p(1, cardinality=True) == 0.5
    assert default_p(3) == pytest.approx(1.0 / 3.0)
    assert default_p(8) == pytest.approx(0.25)
    assert default_p(2) == pytest.approx(1.0 / (1.0 + math.sqrt(3.0)))
    with pytest.raises(InputError):
        default_p(0)


def test_config_validation():
    cfg = SspConfig(p=1.0, epsilon=0.4, r_override=3)
    assert cfg.p == 1.0 and cfg.r_override == 3
    assert SspConfig().p is None
    with pytest.raises(InputError):
        SspConfig(p=0.0)
    with pytest.raises(InputError):
        SspConfig(p=1.01)
    with pytest.raises(InputError):
        SspConfig(epsilon=0.41)
    with pytest.raises(InputError):
        SspConfig(epsilon=0.0)
    with pytest.raises(InputError):
        SspConfig(search_mode="walk")
    with pytest.raises(InputError):
        SspConfig(r_override=0)


def test_schedule_hand_examples():
    s = ThresholdSchedule(1.0, 5, 0.3)
    assert (s.ell, s.M) == (9, 110)
    s = ThresholdSchedule(2.0, 4, 0.2)
    assert (s.ell, s.M) == (15, 386)
    s = ThresholdSchedule(0.5, 6, 0.4)
    assert (s.ell, s.M) == (7, 46)


def test_schedule_thresholds_decrease_from_rho_max():
    s = ThresholdSchedule(3.0, 5, 0.3)
    rhos = [s.rho(i) for i in range(1, s.ell + 1)]
    assert rhos[0] == 3.0
    assert all(a > b for a, b in zip(rhos, rhos[1:]))
    assert rhos[1] == pytest.approx(3.0 * 0.7)
    with pytest.raises(InputError):
        s.rho(0)
    with pytest.raises(InputError):
        s.rho(s.ell + 1)


def test_schedule_validation():
    with pytest.raises(InputError):
        ThresholdSchedule(0.0, 3, 0.3)
    with pytest.raises(InputError):
        ThresholdSchedule(1.0, 0, 0.3)
    with pytest.raises(InputError):
        ThresholdSchedule(1.0, 3, 1.0)


def test_effective_r_override_wins():
    assert effective_r(build_cardinality(6, 2), range(6), r_override=9) == 9
    with pytest.raises(InputError):
        effective_r(build_cardinality(6, 2), range(6), r_override=0)


def test_effective_r_partition():
    system = build_partition_matroid([0, 0, 1, 1, 2, 2], {0: 2, 1: 1, 2: 1})
    tally = Tally()
    r = effective_r(system, range(6), rng=spawn_rng(120), tally=tally)
    assert r == 4  # every maximal set hits all the caps, k = 1
    assert tally.queries == 0


def test_effective_r_scales_with_k():
    system = Intersection([build_cardinality(6, 3), build_cardinality(6, 5)])
    assert system.k == 2
    assert effective_r(system, range(6), rng=spawn_rng(121)) == 6


def test_par_ssp_single_element():
    f = ModularOracle(np.array([2.0]))
    S = par_ssp(SspConfig(), f, build_cardinality(1, 1), rng=spawn_rng(122))
    assert S == {0} and f.value(S) == 2.0


def test_par_ssp_empty_and_blocked_ground_sets():
    assert par_ssp(SspConfig(), ModularOracle(np.zeros(0)),
                   build_cardinality(0, 0), rng=spawn_rng(0)) == set()
    # no feasible singleton at all: quiet empty answer
    f = ModularOracle(np.ones(3))
    assert par_ssp(SspConfig(), f, build_cardinality(3, 0), rng=spawn_rng(0)) == set()


def test_par_ssp_needs_finite_k():
    costs = unit_costs(3, B=2.0)
    with pytest.raises(InputError):
        par_ssp(SspConfig(), ModularOracle(np.ones(3)), Knapsack(costs), rng=spawn_rng(0))


def test_par_ssp_flat_objective_warns():
    f = ModularOracle(np.zeros(3))
    with pytest.warns(RuntimeWarning):
        S = par_ssp(SspConfig(), f, build_cardinality(3, 2), rng=spawn_rng(123))
    assert S == set()


def test_par_ssp_feasible_and_at_least_best_singleton():
    for seed in range(12):
        irng = spawn_rng(124, seed)
        n = 10
        oracle = CutOracle(gen_cut_weights(n, irng, density=0.6))
        system = build_partition_matroid([u % 3 for u in range(n)], {0: 2, 1: 2, 2: 1})
        fstar = max(oracle.value({u}) for u in range(n))
        mode = "binary" if seed % 3 == 0 else "linear"
        S = par_ssp(SspConfig(epsilon=0.3, search_mode=mode), oracle, system,
                    rng=spawn_rng(125, seed))
        assert system.is_independent(S)
        assert oracle.value(S) >= fstar - 1e-9


def test_par_ssp_deterministic_per_seed():
    irng = spawn_rng(126)
    oracle = CutOracle(gen_cut_weights(9, irng, density=0.5))
    system = build_cardinality(9, 3)
    cfg = SspConfig(epsilon=0.25)
    t1, t2 = Tally(), Tally()
    a = par_ssp(cfg, oracle, system, rng=spawn_rng(127), tally=t1)
    b = par_ssp(cfg, oracle, system, rng=spawn_rng(127), tally=t2)
    assert a == b and t1.as_dict() == t2.as_dict()
    cfg2 = SspConfig(epsilon=0.25, seed=55)
    assert par_ssp(cfg2, oracle, system) == par_ssp(cfg2, oracle, system)


def test_par_ssp_runs_one_batch_per_phase(monkeypatch):
    f = ModularOracle(np.array([3.0, 1.0, 2.0]))
    system = build_cardinality(3, 2)
    seen = []

    def spy(params, I, oracle, costs, sys_i, rng, tally=None, force_engine=None):
        seen.append(params)
        return rand_batch(params, I, oracle, costs, sys_i, rng, tally, force_engine)

    monkeypatch.setattr(parssp_mod, "rand_batch", spy)
    cfg = SspConfig(epsilon=0.3, r_override=2)
    S = par_ssp(cfg, f, system, rng=spawn_rng(128))
    sched = ThresholdSchedule(3.0, 2, 0.3)
    assert len(seen) == sched.ell == 7
    assert [q.rho for q in seen] == pytest.approx([sched.rho(i) for i in range(1, 8)])
    assert all(q.M == sched.M and q.p == 0.5 for q in seen)  # cardinality default p
    assert S == {0, 2} and f.value(S) == 5.0


def test_par_ssp_default_p_for_intersections(monkeypatch):
    f = ModularOracle(np.array([2.0, 1.0, 1.0, 3.0]))
    system = Intersection([
        build_partition_matroid([0, 0, 1, 1], {0: 1, 1: 1}),
        build_partition_matroid([0, 1, 0, 1], {0: 1, 1: 1}),
    ])
    captured = []

    def spy(params, I, oracle, costs, sys_i, rng, tally=None, force_engine=None):
        captured.append(params.p)
        return rand_batch(params, I, oracle, costs, sys_i, rng, tally, force_engine)

    monkeypatch.setattr(parssp_mod, "rand_batch", spy)
    par_ssp(SspConfig(epsilon=0.4), f, system, rng=spawn_rng(129))
    assert captured and all(p == pytest.approx(1.0 / (1.0 + math.sqrt(3.0))) for p in captured)
