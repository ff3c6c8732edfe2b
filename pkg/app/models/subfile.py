"""
Subfile Model - bits of one file grouped by the exact caching subset of a node family
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, Tuple

import numpy as np

from app.models.network import NodeId


@dataclass(frozen=True)
class SubfilePartition:
    """
    V_{d,S} for every non-empty class S.

    Subsets are bitmasks over `family`: bit p set means family[p] caches the
    bit. Only non-empty classes are stored; `bits_of` returns an empty array
    for the rest.
    """

    file_index: int
    family: Tuple[NodeId, ...]
    classes: Dict[int, np.ndarray] = field(repr=False)
    file_bits: int = 0

    def bits_of(self, subset: int) -> np.ndarray:
        return self.classes.get(subset, _EMPTY)

    def items(self) -> Iterator[Tuple[int, np.ndarray]]:
        for subset in sorted(self.classes):
            yield subset, self.classes[subset]


@dataclass(frozen=True)
class SubfileSplit:
    """A subfile split by one extra node's cache into in_part and out_part."""

    file_index: int
    subset: int
    pivot: NodeId
    in_part: np.ndarray = field(repr=False)
    out_part: np.ndarray = field(repr=False)

    @property
    def parent_size(self) -> int:
        return len(self.in_part) + len(self.out_part)


_EMPTY = np.zeros(0, dtype=np.int64)
_EMPTY.setflags(write=False)
