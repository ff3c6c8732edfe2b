"""
Placement Service - decentralized random cache placement

Each (node, file) draws a uniform fixed-size subset of bit indices from its
own Philox stream keyed by (seed, role, i, j, file, stream), so an
allocation never depends on enumeration order or thread count.
"""
import json
import math
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from loguru import logger

from app.errors import ConfigError, InvalidShare, InvalidSimulation
from app.models.cache import CacheAllocation, HybridAllocation
from app.models.network import NodeId, NodeRole, SimulationConfig, ValidatedConfig, require_validated, validate_simulation
from app.models.transcript import FileLibrary

ALLOCATION_FORMAT = "coded-cache-allocation"
ALLOCATION_VERSION = 1

# Stream ids: subsystem 1 (and plain placement) vs subsystem 2 of a hybrid split
FIRST_STREAM = 0
SECOND_STREAM = 1
CONTENT_ROLE = 3


def node_stream(seed: int, node: NodeId, file_index: int, stream: int = FIRST_STREAM) -> np.random.Generator:
    key = np.random.SeedSequence([seed, node.role.code, node.i, node.j, file_index, stream])
    return np.random.Generator(np.random.Philox(key))


def quota(memory: float, library_size: float, file_bits: int) -> int:
    """floor(M * F / N) cached bits per file."""
    if memory <= 0:
        return 0
    return int(math.floor(memory * file_bits / library_size))


def all_nodes(config: ValidatedConfig) -> List[NodeId]:
    helpers = [NodeId.helper(i) for i in range(1, config.k1 + 1)]
    users = [NodeId.user(i, j) for i in range(1, config.k1 + 1) for j in range(1, config.k2 + 1)]
    return helpers + users


def _draw(seed: int, node: NodeId, n: int, span: int, count: int, offset: int, stream: int) -> np.ndarray:
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    if count >= span:
        return np.arange(offset, offset + span, dtype=np.int64)
    rng = node_stream(seed, node, n, stream)
    picked = rng.choice(span, size=count, replace=False)
    picked.sort()
    return picked.astype(np.int64) + offset


def _allocate(
    config: ValidatedConfig,
    seed: int,
    span: int,
    offset: int,
    helper_quota: int,
    user_quota: int,
    stream: int,
) -> CacheAllocation:
    caches: Dict[NodeId, Tuple[np.ndarray, ...]] = {}
    for node in all_nodes(config):
        count = helper_quota if node.role is NodeRole.HELPER else user_quota
        caches[node] = tuple(
            _draw(seed, node, n, span, count, offset, stream) for n in range(1, config.n + 1)
        )
    return CacheAllocation(
        library_size=config.n,
        file_bits=span,
        helper_quota=helper_quota,
        user_quota=user_quota,
        caches=caches,
        offset=offset,
    )


def place(config: ValidatedConfig, sim: SimulationConfig) -> CacheAllocation:
    """
    Helpers cache floor(M1*F/N) and users floor(M2*F/N) uniformly chosen bits of every file.
    """
    config = require_validated(config)
    validate_simulation(config, sim)
    f = sim.file_bits
    alloc = _allocate(
        config,
        sim.seed,
        span=f,
        offset=0,
        helper_quota=quota(config.m1, config.n, f),
        user_quota=quota(config.m2, config.n, f),
        stream=FIRST_STREAM,
    )
    logger.info(
        f"Placement done: N={config.n} F={f} helper quota={alloc.helper_quota} "
        f"user quota={alloc.user_quota} seed={sim.seed}"
    )
    return alloc


def place_hybrid(config: ValidatedConfig, sim: SimulationConfig, alpha: float, beta: float) -> HybridAllocation:
    """
    Two independent placements over bits [0, floor(alpha*F)) and the remainder.

    Helpers use their whole memory on the first range; users split theirs
    beta : 1 - beta. Quotas are capped at the range length.
    """
    config = require_validated(config)
    validate_simulation(config, sim)
    for label, value in (("alpha", alpha), ("beta", beta)):
        if not (0.0 <= value <= 1.0):
            raise InvalidShare(f"{label}={value} outside [0, 1]", field=label, value=value)

    f = sim.file_bits
    split = int(math.floor(alpha * f))
    first = _allocate(
        config,
        sim.seed,
        span=split,
        offset=0,
        helper_quota=min(quota(config.m1, config.n, f), split),
        user_quota=min(quota(beta * config.m2, config.n, f), split),
        stream=FIRST_STREAM,
    )
    second = _allocate(
        config,
        sim.seed,
        span=f - split,
        offset=split,
        helper_quota=0,
        user_quota=min(quota((1.0 - beta) * config.m2, config.n, f), f - split),
        stream=SECOND_STREAM,
    )
    logger.info(
        f"Hybrid placement done: split={split}/{f} helper quota={first.helper_quota} "
        f"user quotas={first.user_quota}+{second.user_quota}"
    )
    return HybridAllocation(split=split, first=first, second=second)


def file_library(seed: int, library_size: int, file_bits: int) -> FileLibrary:
    """Pseudo-random 0/1 contents keyed by (seed, file index)."""
    rows = [
        np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, CONTENT_ROLE, n])))
        .integers(0, 2, size=file_bits, dtype=np.uint8)
        for n in range(1, library_size + 1)
    ]
    contents = np.vstack(rows) if rows else np.zeros((0, file_bits), dtype=np.uint8)
    contents.setflags(write=False)
    return FileLibrary(seed=seed, contents=contents)


# ========== Dump / load ==========

def _parse_node(text: str) -> NodeId:
    if text == "S":
        return NodeId.server()
    if text.startswith("H"):
        return NodeId.helper(int(text[1:]))
    if text.startswith("U"):
        i, j = text[1:].split(",")
        return NodeId.user(int(i), int(j))
    raise ConfigError(f"unrecognized node label {text!r}")


def dump_allocation(alloc: CacheAllocation) -> dict:
    """Versioned JSON document: node -> file -> sorted index list."""
    return {
        "format": ALLOCATION_FORMAT,
        "version": ALLOCATION_VERSION,
        "library_size": alloc.library_size,
        "file_bits": alloc.file_bits,
        "offset": alloc.offset,
        "helper_quota": alloc.helper_quota,
        "user_quota": alloc.user_quota,
        "caches": {
            str(node): {str(n): alloc.bits(node, n).tolist() for n in range(1, alloc.library_size + 1)}
            for node in alloc.nodes()
        },
    }


def load_allocation(document: Union[dict, str, Path]) -> CacheAllocation:
    """Rebuild an allocation from dump_allocation output and check its invariants."""
    if isinstance(document, (str, Path)):
        document = json.loads(Path(document).read_text())
    if document.get("format") != ALLOCATION_FORMAT or document.get("version") != ALLOCATION_VERSION:
        raise InvalidSimulation(
            f"unsupported allocation document {document.get('format')!r} v{document.get('version')}"
        )
    library_size = int(document["library_size"])
    caches = {}
    for label, per_file in document["caches"].items():
        caches[_parse_node(label)] = tuple(
            np.asarray(per_file[str(n)], dtype=np.int64) for n in range(1, library_size + 1)
        )
    alloc = CacheAllocation(
        library_size=library_size,
        file_bits=int(document["file_bits"]),
        helper_quota=int(document["helper_quota"]),
        user_quota=int(document["user_quota"]),
        caches=caches,
        offset=int(document.get("offset", 0)),
    )
    alloc.check()
    return alloc
