"""
Cache Model - per-node, per-file cached bit-index sets
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, Tuple

import numpy as np

from app.errors import InvariantViolation, UnknownNode
from app.models.network import NodeId, NodeRole


@dataclass(frozen=True)
class CacheAllocation:
    """
    Cached bits of every node for every file.

    `caches[node][n - 1]` is a sorted, duplicate-free int64 array of bit
    indices in [offset, offset + file_bits). Placement metadata is public:
    senders and receivers both read it.
    """

    library_size: int
    file_bits: int
    helper_quota: int
    user_quota: int
    caches: Dict[NodeId, Tuple[np.ndarray, ...]] = field(repr=False)
    offset: int = 0

    def bits(self, node: NodeId, n: int) -> np.ndarray:
        """Sorted cached bit indices of file n (1-based) at node."""
        try:
            per_file = self.caches[node]
        except KeyError:
            raise UnknownNode(f"{node} has no cache in this allocation")
        return per_file[n - 1]

    def mask(self, node: NodeId, n: int) -> np.ndarray:
        """Boolean membership vector over the allocation's bit range."""
        out = np.zeros(self.file_bits, dtype=bool)
        out[self.bits(node, n) - self.offset] = True
        return out

    def nodes(self) -> Iterator[NodeId]:
        return iter(sorted(self.caches))

    def quota(self, node: NodeId) -> int:
        return self.helper_quota if node.role is NodeRole.HELPER else self.user_quota

    def check(self) -> None:
        """Raise if a (node, file) set breaks the quota, range or distinctness rules."""
        for node, per_file in self.caches.items():
            if len(per_file) != self.library_size:
                raise InvariantViolation(f"{node} holds {len(per_file)} files, expected {self.library_size}")
            expected = self.quota(node)
            for n, idx in enumerate(per_file, start=1):
                if len(idx) != expected:
                    raise InvariantViolation(
                        f"{node} file {n}: {len(idx)} bits cached, quota {expected}", node=str(node), file=n
                    )
                if len(idx) and (
                    idx[0] < self.offset
                    or idx[-1] >= self.offset + self.file_bits
                    or np.any(np.diff(idx) <= 0)
                ):
                    raise InvariantViolation(f"{node} file {n}: indices unsorted, repeated or out of range")


@dataclass(frozen=True)
class HybridAllocation:
    """
    Placement for memory sharing: subsystem 1 covers bits [0, split) of every
    file, subsystem 2 covers [split, F). Helpers only cache in subsystem 1.
    """

    split: int
    first: CacheAllocation
    second: CacheAllocation
