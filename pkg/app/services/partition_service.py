"""
Partition Service - V_{d,S} subfile decomposition and pivot splits
"""
from typing import Sequence

import numpy as np

from app.errors import ConfigError, InvalidSimulation, PivotInFamily
from app.models.cache import CacheAllocation
from app.models.network import NodeId
from app.models.subfile import SubfilePartition, SubfileSplit

MAX_FAMILY = 62


def partition(alloc: CacheAllocation, d: int, family: Sequence[NodeId]) -> SubfilePartition:
    """
    Group the bits of file d by the exact subset of `family` caching them.

    Bit p of a subset mask stands for family[p]. Bit lists come out sorted
    and hold absolute indices in the allocation's range.
    """
    family = tuple(family)
    if not family:
        raise ConfigError("partition family must not be empty")
    if len(set(family)) != len(family):
        raise ConfigError("partition family has repeated nodes")
    if len(family) > MAX_FAMILY:
        raise ConfigError(f"partition family of {len(family)} nodes exceeds {MAX_FAMILY}")
    if not (1 <= d <= alloc.library_size):
        raise InvalidSimulation(f"file index {d} outside [1, {alloc.library_size}]")

    codes = np.zeros(alloc.file_bits, dtype=np.int64)
    for position, node in enumerate(family):
        codes |= alloc.mask(node, d).astype(np.int64) << position

    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    subsets, starts = np.unique(sorted_codes, return_index=True)
    groups = np.split(order + alloc.offset, starts[1:])
    classes = {int(subset): group.astype(np.int64) for subset, group in zip(subsets, groups)}
    return SubfilePartition(file_index=d, family=family, classes=classes, file_bits=alloc.file_bits)


def split_by_pivot(part: SubfilePartition, subset: int, pivot: NodeId, alloc: CacheAllocation) -> SubfileSplit:
    """Split V_{d,subset} into the bits `pivot` caches (in_part) and the rest (out_part)."""
    if pivot in part.family:
        raise PivotInFamily(f"pivot {pivot} belongs to the partition family", pivot=str(pivot))
    parent = part.bits_of(subset)
    cached = alloc.mask(pivot, part.file_index)[parent - alloc.offset]
    return SubfileSplit(
        file_index=part.file_index,
        subset=subset,
        pivot=pivot,
        in_part=parent[cached],
        out_part=parent[~cached],
    )
