import numpy as np
import pytest

from app.errors import ConfigError, InvalidSimulation, PivotInFamily
from app.models.cache import CacheAllocation
from app.models.network import NetworkConfig, NodeId, NodeRole, SimulationConfig, validate
from app.services.partition_service import partition, split_by_pivot
from app.services.placement_service import place, place_hybrid


def _helpers(config):
    return [NodeId.helper(i) for i in range(1, config.k1 + 1)]


def _users(config, i):
    return [NodeId.user(i, j) for j in range(1, config.k2 + 1)]


def test_classes_cover_file_exactly_once(small_config, small_sim):
    alloc = place(small_config, small_sim)
    part = partition(alloc, 2, _users(small_config, 1))
    bits = np.sort(np.concatenate([b for _, b in part.items()]))
    assert np.array_equal(bits, np.arange(small_sim.file_bits))


def test_class_membership_matches_caches(small_config, small_sim):
    alloc = place(small_config, small_sim)
    family = _helpers(small_config) + _users(small_config, 2)
    part = partition(alloc, 5, family)
    masks = [alloc.mask(node, 5) for node in family]
    for subset, bits in part.items():
        assert np.all(np.diff(bits) > 0)
        for position, mask in enumerate(masks):
            expected = bool(subset >> position & 1)
            assert np.all(mask[bits] == expected)


def test_missing_classes_are_empty(small_config, small_sim):
    alloc = place(small_config, small_sim)
    part = partition(alloc, 1, _users(small_config, 1))
    assert part.family == tuple(_users(small_config, 1))
    empty = part.bits_of(1 << 40)
    assert len(empty) == 0


def test_partition_of_offset_allocation(small_config, small_sim):
    pair = place_hybrid(small_config, small_sim, 0.5, 0.5)
    part = partition(pair.second, 1, _users(small_config, 1))
    bits = np.sort(np.concatenate([b for _, b in part.items()]))
    assert np.array_equal(bits, np.arange(256, 512))


def test_partition_rejects_bad_family(small_config, small_sim):
    alloc = place(small_config, small_sim)
    with pytest.raises(ConfigError):
        partition(alloc, 1, [])
    with pytest.raises(ConfigError):
        partition(alloc, 1, [NodeId.helper(1), NodeId.helper(1)])
    with pytest.raises(InvalidSimulation):
        partition(alloc, 7, _helpers(small_config))


def test_split_by_pivot(small_config, small_sim):
    alloc = place(small_config, small_sim)
    part = partition(alloc, 3, _helpers(small_config))
    pivot = NodeId.user(1, 1)
    for subset, parent in part.items():
        split = split_by_pivot(part, subset, pivot, alloc)
        assert split.parent_size == len(parent)
        assert np.array_equal(np.sort(np.concatenate([split.in_part, split.out_part])), parent)
        cached = alloc.mask(pivot, 3)
        assert np.all(cached[split.in_part])
        assert not np.any(cached[split.out_part])


def test_pivot_must_be_outside_family(small_config, small_sim):
    alloc = place(small_config, small_sim)
    part = partition(alloc, 3, _helpers(small_config))
    with pytest.raises(PivotInFamily):
        split_by_pivot(part, 0, NodeId.helper(1), alloc)


# ========== Worked examples and per-bit oracle ==========

def _hand_allocation():
    """F=8, one file: H1 caches 0-3, H2 caches 2-5, U1,1 caches 1, 3 and 6."""
    return CacheAllocation(
        library_size=1,
        file_bits=8,
        helper_quota=4,
        user_quota=3,
        caches={
            NodeId.helper(1): (np.array([0, 1, 2, 3], dtype=np.int64),),
            NodeId.helper(2): (np.array([2, 3, 4, 5], dtype=np.int64),),
            NodeId.user(1, 1): (np.array([1, 3, 6], dtype=np.int64),),
        },
    )


def test_partition_of_hand_built_allocation():
    alloc = _hand_allocation()
    alloc.check()
    part = partition(alloc, 1, [NodeId.helper(1), NodeId.helper(2)])
    assert {mask: bits.tolist() for mask, bits in part.items()} == {
        0b00: [6, 7],
        0b01: [0, 1],
        0b10: [4, 5],
        0b11: [2, 3],
    }


def test_pivot_split_of_hand_built_allocation():
    alloc = _hand_allocation()
    part = partition(alloc, 1, [NodeId.helper(1), NodeId.helper(2)])
    pivot = NodeId.user(1, 1)
    expected = {0b00: ([6], [7]), 0b01: ([1], [0]), 0b10: ([], [4, 5]), 0b11: ([3], [2])}
    for mask, (in_part, out_part) in expected.items():
        split = split_by_pivot(part, mask, pivot, alloc)
        assert split.in_part.tolist() == in_part
        assert split.out_part.tolist() == out_part


@pytest.mark.parametrize("seed", range(25))
def test_partition_matches_per_bit_membership(seed):
    rng = np.random.default_rng(seed)
    file_bits = int(rng.integers(1, 65))
    helper_quota = int(rng.integers(0, file_bits + 1))
    user_quota = int(rng.integers(0, file_bits + 1))
    nodes = [NodeId.helper(1), NodeId.helper(2), NodeId.user(1, 1), NodeId.user(2, 1)]
    caches = {}
    for node in nodes:
        count = helper_quota if node.role is NodeRole.HELPER else user_quota
        caches[node] = tuple(
            np.sort(rng.choice(file_bits, size=count, replace=False)).astype(np.int64) for _ in range(3)
        )
    alloc = CacheAllocation(
        library_size=3, file_bits=file_bits, helper_quota=helper_quota, user_quota=user_quota, caches=caches
    )
    alloc.check()
    family = [nodes[k] for k in rng.permutation(len(nodes))[: int(rng.integers(1, len(nodes) + 1))]]
    d = int(rng.integers(1, 4))

    expected = {}
    cached = [set(alloc.bits(node, d).tolist()) for node in family]
    for bit in range(file_bits):
        mask = sum(1 << p for p, members in enumerate(cached) if bit in members)
        expected.setdefault(mask, []).append(bit)

    part = partition(alloc, d, family)
    assert sorted(part.classes) == sorted(expected)
    for mask, bits in expected.items():
        assert part.bits_of(mask).tolist() == bits


# ========== Class sizes at large F ==========

def _large_allocation(m1, m2, file_bits=100_000):
    config = validate(NetworkConfig(
        library_size=4, helper_count=2, users_per_helper=2, helper_memory=m1, user_memory=m2
    ))
    return place(config, SimulationConfig(file_bits=file_bits, seed=3, request_profile=(1, 2, 3, 4)))


def test_class_sizes_follow_product_law():
    q1, q2 = 0.25, 0.5
    file_bits = 100_000
    alloc = _large_allocation(1.0, 2.0, file_bits)
    family = [NodeId.helper(1), NodeId.user(1, 1), NodeId.user(1, 2)]
    shares = [q1, q2, q2]
    part = partition(alloc, 2, family)
    for mask in range(1 << len(family)):
        p = 1.0
        for position, q in enumerate(shares):
            p *= q if mask >> position & 1 else 1.0 - q
        sigma = np.sqrt(file_bits * p * (1.0 - p))
        assert abs(len(part.bits_of(mask)) - file_bits * p) <= 5 * sigma


def test_pivot_split_ratio_matches_user_share():
    q2 = 0.25
    alloc = _large_allocation(1.0, 1.0)
    part = partition(alloc, 1, [NodeId.helper(1), NodeId.helper(2)])
    for mask, parent in part.items():
        split = split_by_pivot(part, mask, NodeId.user(1, 1), alloc)
        ratio = len(split.in_part) / len(parent)
        assert abs(ratio - q2) <= 4.5 * np.sqrt(q2 * (1 - q2) / len(parent))
    split = split_by_pivot(part, 0, NodeId.user(1, 1), alloc)
    assert abs(len(split.in_part) / split.parent_size - q2) <= 0.02
