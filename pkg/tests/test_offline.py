"""Offline oracles: state space, dynamic program, bracketing strategies."""

import random

import pytest

from repart.core import Params, Request, TooLarge, contiguous_configuration, \
    min_migration_cost, new_configuration, serve_cost
from repart.offline import (
    MalformedProfile,
    PartitionSpace,
    enumerate_partitions,
    exhaustive_optimal,
    optimal_cost,
    partition_count,
    partition_of_configuration,
    reference_strategies_k2,
    static_optimal,
)


def test_partition_counts():
    assert partition_count(4, 2, 2) == 3
    assert partition_count(6, 2, 3) == 15
    assert partition_count(6, 3, 2) == 10
    assert partition_count(4, 4, 1) == 1
    for n, k, ell in ((4, 2, 2), (6, 2, 3), (6, 3, 2), (4, 4, 1)):
        assert len(enumerate_partitions(n, k, ell)) == partition_count(n, k, ell)


def test_enumerate_partitions_shape():
    parts = enumerate_partitions(6, 3, 2)
    assert len(set(parts)) == 10
    for p in parts:
        flat = sorted(x for block in p for x in block)
        assert flat == list(range(6))
        assert all(block == tuple(sorted(block)) for block in p)
    with pytest.raises(TooLarge):
        enumerate_partitions(5, 2, 2)
    with pytest.raises(TooLarge):
        enumerate_partitions(16, 4, 4)  # above the state cap


def test_partition_of_configuration():
    config = new_configuration([1, 0, 1, 0], 2, 2)
    assert partition_of_configuration(config) == ((0, 2), (1, 3))


def test_state_of_rejects_unbalanced():
    space = PartitionSpace(Params(4, 2, 2))
    with pytest.raises(TooLarge):
        space.state_of(new_configuration([0, 0, 0, 1], 2, 3))


def _random_requests(rng, n, count):
    out = []
    for _ in range(count):
        u, v = rng.sample(range(n), 2)
        out.append(Request(min(u, v), max(u, v)))
    return out


def test_dp_matches_exhaustive():
    rng = random.Random(0)
    for alpha in (1, 2):
        p = Params(4, 2, 2, alpha=alpha)
        space = PartitionSpace(p)
        initial = contiguous_configuration(p)
        for _ in range(20):
            sigma = _random_requests(rng, 4, rng.randint(0, 6))
            total, _ = optimal_cost(sigma, p, initial, space)
            assert total == exhaustive_optimal(sigma, p, initial, space)


def test_dp_schedule_is_consistent():
    rng = random.Random(1)
    p = Params(6, 2, 3, alpha=2)
    space = PartitionSpace(p)
    initial = contiguous_configuration(p)
    for _ in range(10):
        sigma = _random_requests(rng, 6, 8)
        total, schedule = optimal_cost(sigma, p, initial, space)
        assert len(schedule) == len(sigma) + 1
        assert schedule[0] == partition_of_configuration(initial)
        # re-price the schedule independently
        cost = 0
        configs = [new_configuration(
            {x: c for c, block in enumerate(part) for x in block}, 3, 2)
            for part in schedule]
        for i, req in enumerate(sigma):
            cost += min_migration_cost(configs[i], configs[i + 1], p.alpha)
            cost += serve_cost(configs[i + 1], req)
        assert cost == total


def test_static_upper_bounds_dp():
    rng = random.Random(2)
    p = Params(6, 3, 2)
    space = PartitionSpace(p)
    initial = contiguous_configuration(p)
    for _ in range(15):
        sigma = _random_requests(rng, 6, 12)
        dyn, _ = optimal_cost(sigma, p, initial, space)
        stat, _ = static_optimal(sigma, p, initial, space)
        assert dyn <= stat


def test_dp_monotone_in_prefix():
    rng = random.Random(3)
    p = Params(4, 2, 2)
    space = PartitionSpace(p)
    initial = contiguous_configuration(p)
    sigma = _random_requests(rng, 4, 10)
    costs = [optimal_cost(sigma[:i], p, initial, space)[0]
             for i in range(len(sigma) + 1)]
    assert costs[0] == 0
    assert all(a <= b for a, b in zip(costs, costs[1:]))


def test_empty_request_sequence():
    p = Params(4, 2, 2)
    initial = contiguous_configuration(p)
    total, schedule = optimal_cost([], p, initial)
    assert total == 0
    assert schedule == [partition_of_configuration(initial)]
    assert exhaustive_optimal([], p, initial) == 0


def test_exhaustive_caps():
    p = Params(4, 2, 2)
    initial = contiguous_configuration(p)
    with pytest.raises(TooLarge):
        exhaustive_optimal(_random_requests(random.Random(4), 4, 9), p, initial)
    p8 = Params(8, 2, 4)  # 105 partitions
    with pytest.raises(TooLarge):
        exhaustive_optimal([Request(0, 2)], p8, contiguous_configuration(p8))


def test_reference_strategies():
    # pays odd phases / even phases plus one swap / one swap per phase
    assert reference_strategies_k2([4, 4], 1) == (4, 6, 4)
    assert reference_strategies_k2([1], 1) == (1, 2, 2)
    assert reference_strategies_k2([1], 2) == (1, 4, 4)
    assert reference_strategies_k2([3] * 5, 1) == (9, 8, 10)
    with pytest.raises(MalformedProfile):
        reference_strategies_k2([], 1)
    with pytest.raises(MalformedProfile):
        reference_strategies_k2([2, 0, 2], 1)
