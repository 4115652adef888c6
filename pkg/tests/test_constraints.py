"""Independence systems: membership rules, vectorized feasibility paths,
declared k parameters, and the brute-force verifier."""

import numpy as np
import pytest

from parsubmax.constraints import (
    Cardinality,
    Contraction,
    CostModel,
    InputError,
    Intersection,
    Knapsack,
    MaskSystem,
    TrivialSystem,
    as_mask_system,
    build_cardinality,
    build_intersection,
    build_knapsack,
    build_label_system,
    build_partition_matroid,
    check_downward_closure,
    unit_costs,
    verify_k_parameter,
)
from parsubmax.core import spawn_rng


def naive_chain(system, base, seq, cands):
    d = len(seq)
    out = np.empty((d + 1, len(cands)), dtype=bool)
    for i in range(d + 1):
        cur = set(base) | set(seq[:i])
        out[i] = [u in cur or system.is_independent(cur | {u}) for u in cands]
    return out


def assert_batch_paths_agree(system, base, seq, cands):
    want = naive_chain(system, base, seq, cands)
    got = system.chain_extend_feasible(base, seq, cands)
    assert np.array_equal(np.asarray(got), want)
    got0 = np.asarray(system.extend_feasible(base, cands))
    assert np.array_equal(got0, want[0])


def test_cost_model_validation():
    with pytest.raises(InputError):
        CostModel([1.0, 0.0])
    with pytest.raises(InputError):
        CostModel([1.0, np.inf])
    with pytest.raises(InputError):
        CostModel([1.0], B=0.0)


def test_cost_model_accessors():
    cm = CostModel([2.0, 1.0, 4.0], B=5.0)
    assert cm.cost(2) == 4.0
    assert cm.total({0, 2}) == 6.0
    assert cm.total(set()) == 0.0
    cm2 = cm.with_budget(9.0)
    assert cm2.B == 9.0 and cm.B == 5.0
    assert unit_costs(3).c.tolist() == [1.0, 1.0, 1.0]


def test_knapsack_membership():
    sys3 = build_knapsack(CostModel([1.0, 1.0, 1.0], B=2.0))
    assert sys3.is_independent(set())
    assert sys3.is_independent({0, 1})
    assert not sys3.is_independent({0, 1, 2})
    assert sys3.k == 3 and sys3.k_unbounded


def test_knapsack_validation():
    with pytest.raises(InputError):
        Knapsack(CostModel([1.0, 1.0]))          # no budget
    # an element bigger than the budget is legal, just never selectable
    wide = Knapsack(CostModel([3.0, 1.0], B=2.0))
    assert not wide.is_independent({0})
    assert wide.is_independent({1})


def test_knapsack_batch_paths():
    rng = spawn_rng(40)
    costs = CostModel(0.2 + rng.random(8), B=2.5)
    system = Knapsack(costs)
    assert_batch_paths_agree(system, {1}, [4, 0, 6], [2, 4, 7])
    table = system.mask_table()
    for mask in range(1 << 8):
        members = {u for u in range(8) if (mask >> u) & 1}
        assert bool(table[mask]) == system.is_independent(members)


def test_cardinality_membership():
    assert not build_cardinality(4, 0).is_independent({1})
    assert build_cardinality(4, 0).is_independent(set())
    assert build_cardinality(4, 4).is_independent({0, 1, 2, 3})
    sys2 = build_cardinality(4, 2)
    assert sys2.is_independent({1, 3}) and not sys2.is_independent({0, 1, 3})
    assert sys2.k == 1 and sys2.is_matroid and sys2.r_hint == 2
    with pytest.raises(InputError):
        Cardinality(4, -1)


def test_cardinality_batch_paths():
    system = build_cardinality(6, 3)
    assert_batch_paths_agree(system, {5}, [0, 2, 4], [0, 1, 3])
    table = system.mask_table()
    assert table.sum() == sum(bin(m).count("1") <= 3 for m in range(64))


def test_partition_matroid_membership():
    system = build_partition_matroid([0, 0, 1], {0: 1, 1: 1})
    assert system.is_independent({0, 2})
    assert not system.is_independent({0, 1})
    capped = build_partition_matroid([0, 0, 1], {0: 1, 1: 1}, total_cap=1)
    assert not capped.is_independent({0, 2})
    assert capped.r_hint == 1
    with pytest.raises(InputError):
        build_partition_matroid([0, 1], {0: 1})
    with pytest.raises(InputError):
        build_partition_matroid([0], {0: -1})


def test_partition_matroid_batch_paths():
    system = build_partition_matroid([0, 1, 2, 0, 1, 2, 0], {0: 2, 1: 1, 2: 2}, total_cap=3)
    assert_batch_paths_agree(system, {1}, [0, 5, 3], [2, 3, 4, 6])


def test_label_system_membership():
    system = build_label_system([{0}, {0, 1}, {1, 2}, {2}], {0: 1, 1: 2, 2: 1}, total_cap=3)
    assert system.k == 3
    assert system.is_independent(set())
    assert system.is_independent({1, 2})
    assert not system.is_independent({0, 1})     # label 0 at cap twice
    blocked = build_label_system([{0, 1}, {1}], {0: 0, 1: 2}, total_cap=2)
    assert not blocked.is_independent({0})
    with pytest.raises(InputError):
        build_label_system([set(), {0}], {0: 1}, total_cap=1)
    with pytest.raises(InputError):
        build_label_system([{0, 1}], {0: 1}, total_cap=1)


def test_label_system_batch_paths():
    system = build_label_system(
        [{u % 2, (u + 1) % 3} for u in range(7)], {0: 2, 1: 2, 2: 1}, total_cap=4)
    assert_batch_paths_agree(system, {6}, [0, 3, 1], [2, 3, 5])


def test_intersection_membership_and_k():
    m1 = build_partition_matroid([0, 0, 1], {0: 1, 1: 1})
    m2 = build_partition_matroid([0, 1, 1], {0: 1, 1: 1})
    inter = build_intersection([m1, m2])
    assert inter.k == 2 and not inter.k_unbounded
    assert inter.is_independent({0, 2})
    assert not inter.is_independent({1, 2})      # fine in m1, blocked in m2
    with pytest.raises(InputError):
        build_intersection([])
    with pytest.raises(InputError):
        build_intersection([m1, build_cardinality(5, 2)])


def test_intersection_with_trivial_is_identity():
    card = build_cardinality(5, 2)
    both = build_intersection([TrivialSystem(5), card])
    for mask in range(32):
        S = {u for u in range(5) if (mask >> u) & 1}
        assert both.is_independent(S) == card.is_independent(S)


def test_intersection_flags():
    knap = Knapsack(CostModel([1.0, 1.0], B=1.5))
    mixed = build_intersection([knap, build_cardinality(2, 1)])
    assert mixed.k_unbounded and mixed.k == 2
    label = build_label_system([{0}, {0, 1}], {0: 1, 1: 1}, total_cap=2)
    with pytest.warns(UserWarning):
        prod = build_intersection([label, label])
    assert prod.k == 4  # product bound for non-matroid constituents


def test_intersection_batch_paths():
    m1 = build_partition_matroid([u % 3 for u in range(7)], {0: 2, 1: 1, 2: 2})
    m2 = build_partition_matroid([u // 3 for u in range(7)], {0: 2, 1: 2, 2: 1})
    assert_batch_paths_agree(build_intersection([m1, m2]), set(), [6, 1, 3], [0, 2, 4, 5])


def test_mask_system_mirrors_source():
    src = build_partition_matroid([u % 2 for u in range(6)], {0: 2, 1: 1})
    ms = as_mask_system(src)
    assert isinstance(ms, MaskSystem)
    assert ms.k == src.k and ms.is_matroid and ms.r_hint == src.r_hint
    for mask in range(64):
        S = {u for u in range(6) if (mask >> u) & 1}
        assert ms.is_independent(S) == src.is_independent(S)
    assert_batch_paths_agree(ms, {0}, [1, 2], [3, 1, 5])
    assert as_mask_system(ms) is ms
    big = build_cardinality(22, 3)
    assert as_mask_system(big) is big
    with pytest.raises(InputError):
        MaskSystem(np.ones(5, dtype=np.uint8))


def test_contraction():
    base = build_cardinality(5, 2)
    contracted = Contraction(base, {0})
    assert contracted.is_independent({3})
    assert not contracted.is_independent({3, 4})
    assert contracted.k == base.k
    assert_batch_paths_agree(contracted, set(), [2, 3], [1, 2, 4])


def test_verify_k_parameter_examples():
    part = build_partition_matroid([u % 3 for u in range(8)], {0: 2, 1: 1, 2: 2})
    assert verify_k_parameter(part, 8, 1) is True
    inter = build_intersection([
        build_partition_matroid([0, 0, 1], {0: 1, 1: 1}),
        build_partition_matroid([0, 1, 1], {0: 1, 1: 1}),
    ])
    assert verify_k_parameter(inter, 3, 2) is True
    assert verify_k_parameter(inter, 3, 1) is False
    assert verify_k_parameter(build_cardinality(3, 2), 3, 0) is False
    with pytest.raises(InputError):
        verify_k_parameter(build_cardinality(13, 2), 13, 1)


def random_system(rng, n):
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return build_cardinality(n, int(rng.integers(0, n + 1)))
    if kind == 1:
        labels = [int(x) for x in rng.integers(0, 3, n)]
        caps = {g: int(rng.integers(0, 3)) for g in range(3)}
        return build_partition_matroid(labels, caps)
    if kind == 2:
        label_sets = [{int(x) for x in rng.integers(0, 3, int(rng.integers(1, 3)))}
                      for _ in range(n)]
        caps = {g: int(rng.integers(1, 3)) for g in range(3)}
        return build_label_system(label_sets, caps, total_cap=int(rng.integers(1, n + 1)))
    m1 = build_partition_matroid([int(x) for x in rng.integers(0, 2, n)],
                                 {g: int(rng.integers(1, 3)) for g in range(2)})
    m2 = build_partition_matroid([int(x) for x in rng.integers(0, 2, n)],
                                 {g: int(rng.integers(1, 3)) for g in range(2)})
    return build_intersection([m1, m2])


def test_declared_k_verifies_on_random_instances():
    rng = spawn_rng(41)
    for trial in range(12):
        n = int(rng.integers(4, 9))
        system = random_system(rng, n)
        assert verify_k_parameter(system, n, system.k) is True


def test_sampled_downward_closure():
    rng = spawn_rng(43)
    systems = [
        build_cardinality(8, 3),
        Knapsack(CostModel(0.3 + rng.random(8), B=2.0)),
        build_partition_matroid([u % 3 for u in range(8)], {0: 2, 1: 1, 2: 2}),
        build_label_system([{u % 2, (u + 1) % 3} for u in range(8)],
                           {0: 2, 1: 2, 2: 1}, total_cap=4),
        TrivialSystem(8),
    ]
    for system in systems:
        assert system.is_independent(set())
        assert check_downward_closure(system, rng, trials=300)


def test_random_batch_paths_match_naive():
    rng = spawn_rng(44)
    for trial in range(10):
        n = int(rng.integers(5, 9))
        system = random_system(rng, n)
        elems = list(rng.permutation(n))
        base = {int(u) for u in elems[:2] if system.is_independent({int(x) for x in elems[:2]})}
        if not system.is_independent(base):
            base = set()
        seq = []
        for u in elems[2:5]:
            if system.is_independent(base | set(seq) | {int(u)}):
                seq.append(int(u))
        cands = [int(u) for u in elems[4:]]
        if cands:
            assert_batch_paths_agree(system, base, seq, cands)
