import json

import numpy as np
import pytest

from app.errors import InvalidShare, InvalidSimulation, InvariantViolation, UnknownNode
from app.models.cache import CacheAllocation
from app.models.network import NetworkConfig, NodeId, SimulationConfig, validate
from app.services.placement_service import (
    all_nodes, dump_allocation, file_library, load_allocation, place, place_hybrid, quota,
)


def test_quota_floors():
    assert quota(2.0, 6, 512) == 170
    assert quota(0.0, 6, 512) == 0
    assert quota(6.0, 6, 512) == 512


def test_place_respects_quotas_and_ranges(small_config, small_sim):
    alloc = place(small_config, small_sim)
    alloc.check()
    assert alloc.helper_quota == 170
    assert alloc.user_quota == 85
    assert len(list(alloc.nodes())) == 2 + 6
    for node in all_nodes(small_config):
        for n in range(1, small_config.n + 1):
            bits = alloc.bits(node, n)
            assert len(bits) == alloc.quota(node)
            assert np.all(np.diff(bits) > 0)
            assert bits.min() >= 0 and bits.max() < small_sim.file_bits


def test_place_is_deterministic(small_config, small_sim):
    first = place(small_config, small_sim)
    second = place(small_config, small_sim)
    other = place(small_config, small_sim.model_copy(update={"seed": 12}))
    node = NodeId.user(1, 2)
    assert np.array_equal(first.bits(node, 3), second.bits(node, 3))
    assert not np.array_equal(first.bits(node, 3), other.bits(node, 3))


def test_nodes_draw_independently(small_config, small_sim):
    alloc = place(small_config, small_sim)
    assert not np.array_equal(alloc.bits(NodeId.user(1, 1), 1), alloc.bits(NodeId.user(1, 2), 1))
    assert not np.array_equal(alloc.bits(NodeId.user(1, 1), 1), alloc.bits(NodeId.user(1, 1), 2))


def test_server_has_no_cache(small_config, small_sim):
    alloc = place(small_config, small_sim)
    with pytest.raises(UnknownNode):
        alloc.bits(NodeId.server(), 1)


def test_full_memory_caches_everything(small_config, small_sim):
    alloc = place(small_config.with_memories(6.0, 6.0), small_sim)
    assert np.array_equal(alloc.bits(NodeId.helper(1), 4), np.arange(small_sim.file_bits))


def test_hybrid_placement_splits_ranges(small_config, small_sim):
    pair = place_hybrid(small_config, small_sim, 0.5, 0.25)
    assert pair.split == 256
    assert pair.first.offset == 0 and pair.first.file_bits == 256
    assert pair.second.offset == 256 and pair.second.file_bits == 256
    assert pair.first.helper_quota == 170
    assert pair.second.helper_quota == 0
    assert pair.first.user_quota == quota(0.25, 6, 512)
    assert pair.second.user_quota == quota(0.75, 6, 512)
    pair.first.check()
    pair.second.check()
    assert pair.second.bits(NodeId.user(2, 1), 1).min() >= 256


def test_hybrid_placement_caps_helper_quota(small_config, small_sim):
    pair = place_hybrid(small_config, small_sim, 0.1, 1.0)
    assert pair.split == 51
    assert pair.first.helper_quota == 51


def test_hybrid_placement_with_full_share_matches_plain(small_config, small_sim):
    pair = place_hybrid(small_config, small_sim, 1.0, 1.0)
    plain = place(small_config, small_sim)
    for node in all_nodes(small_config):
        assert np.array_equal(pair.first.bits(node, 2), plain.bits(node, 2))
    assert pair.second.file_bits == 0


def test_hybrid_placement_rejects_share(small_config, small_sim):
    with pytest.raises(InvalidShare):
        place_hybrid(small_config, small_sim, 1.2, 0.5)


def test_placement_checks_simulation(small_config):
    with pytest.raises(InvalidSimulation):
        place(small_config, SimulationConfig(file_bits=4, request_profile=(1,) * 6))


def test_allocation_check_catches_bad_sets(small_config, small_sim):
    alloc = place(small_config, small_sim)
    node = NodeId.user(1, 1)
    broken = dict(alloc.caches)
    broken[node] = (alloc.bits(node, 1)[::-1],) + alloc.caches[node][1:]
    bad = CacheAllocation(
        library_size=alloc.library_size,
        file_bits=alloc.file_bits,
        helper_quota=alloc.helper_quota,
        user_quota=alloc.user_quota,
        caches=broken,
    )
    with pytest.raises(InvariantViolation):
        bad.check()


def test_dump_and_load(small_config, small_sim, tmp_path):
    alloc = place(small_config, small_sim)
    document = dump_allocation(alloc)
    assert document["format"] == "coded-cache-allocation"
    assert set(document["caches"]) == {"H1", "H2", "U1,1", "U1,2", "U1,3", "U2,1", "U2,2", "U2,3"}

    path = tmp_path / "alloc.json"
    path.write_text(json.dumps(document))
    loaded = load_allocation(path)
    assert np.array_equal(loaded.bits(NodeId.user(2, 3), 6), alloc.bits(NodeId.user(2, 3), 6))

    with pytest.raises(InvalidSimulation):
        load_allocation({**document, "version": 99})


def test_file_library(small_sim):
    library = file_library(small_sim.seed, 6, small_sim.file_bits)
    assert library.contents.shape == (6, 512)
    assert set(np.unique(library.contents)) <= {0, 1}
    assert np.array_equal(library.file(3), file_library(small_sim.seed, 6, 512).file(3))
    assert not np.array_equal(library.file(1), library.file(2))


# ========== Randomness of the draws ==========

def _two_file_config():
    return validate(NetworkConfig(
        library_size=2, helper_count=2, users_per_helper=2, helper_memory=1.0, user_memory=1.0
    ))


def test_each_bit_cached_with_probability_m_over_n():
    config = _two_file_config()
    runs, file_bits = 1000, 100
    counts = np.zeros(file_bits)
    for seed in range(runs):
        sim = SimulationConfig(file_bits=file_bits, seed=seed, request_profile=(1, 2, 1, 2))
        counts += place(config, sim).mask(NodeId.user(1, 1), 1)
    sigma = np.sqrt(runs * 0.5 * 0.5)
    deviation = np.abs(counts - runs * 0.5)
    assert deviation.max() <= 4.5 * sigma
    assert np.mean(deviation <= 3 * sigma) >= 0.95


def test_seeds_give_independent_caches():
    config = _two_file_config()
    draws = [
        place(config, SimulationConfig(file_bits=1000, seed=seed, request_profile=(1, 2, 1, 2))).bits(NodeId.user(2, 1), 2)
        for seed in (5, 6)
    ]
    assert not np.array_equal(*draws)
    # two independent 500-of-1000 draws share about 250 bits
    assert 200 <= len(np.intersect1d(*draws)) <= 300
