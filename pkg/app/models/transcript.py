"""
Transcript Model - coded messages, per-link transcripts and delivery outcomes
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from app.models.cache import CacheAllocation
from app.models.network import NodeId, RatePair, SimulationConfig, ValidatedConfig


class LinkLayer(str, Enum):
    SERVER = "server"
    HELPER = "helper"


@dataclass(frozen=True)
class Segment:
    """One participant of an XOR: the receiver and the ordered file bits it needs."""

    receiver: NodeId
    file_index: int
    bits: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class Message:
    """
    XOR of the segments' bit values, each zero-padded to the longest one.

    `subset` is the bitmask of the node subset the message serves, relative
    to the family the sender enumerated; `j` is the user index within a
    helper group for server messages of the two-layer schemes (0 otherwise).
    """

    layer: LinkLayer
    helper: int
    subset: int
    j: int
    segments: Tuple[Segment, ...] = field(repr=False)
    payload: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        return len(self.payload)

    def segment_for(self, receiver: NodeId) -> Optional[Segment]:
        for segment in self.segments:
            if segment.receiver == receiver:
                return segment
        return None


@dataclass
class Transcript:
    """Ordered messages sent on one link."""

    layer: LinkLayer
    helper: int = 0
    messages: List[Message] = field(default_factory=list)

    @property
    def total_bits(self) -> int:
        return sum(m.length for m in self.messages)

    def append(self, message: Message) -> None:
        self.messages.append(message)

    def extend(self, other: "Transcript") -> None:
        self.messages.extend(other.messages)


@dataclass(frozen=True)
class FileLibrary:
    """Pseudo-random file contents: row n - 1 holds the F bits of file n."""

    seed: int
    contents: np.ndarray = field(repr=False)

    @property
    def file_bits(self) -> int:
        return self.contents.shape[1]

    def file(self, n: int) -> np.ndarray:
        return self.contents[n - 1]


@dataclass(frozen=True)
class DeliveryContext:
    """Public state a receiver may consult: topology, demands, contents and placement."""

    config: ValidatedConfig
    sim: SimulationConfig
    library: FileLibrary = field(repr=False)
    allocations: Tuple[CacheAllocation, ...] = field(repr=False)


@dataclass
class DeliveryOutcome:
    """Everything one deliver_* call produced, plus the measured rates."""

    scheme: str
    file_bits: int
    server: Transcript
    helpers: Dict[int, Transcript]
    decoded: Dict[Tuple[int, int], np.ndarray] = field(default_factory=dict, repr=False)
    context: Optional[DeliveryContext] = field(default=None, repr=False)

    @property
    def rates(self) -> RatePair:
        worst = max((t.total_bits for t in self.helpers.values()), default=0)
        return RatePair(r1=self.server.total_bits / self.file_bits, r2=worst / self.file_bits)


class SimulationReport(BaseModel):
    """Measured vs closed-form rates of one simulated delivery."""

    scheme: str
    file_bits: int
    seed: int
    request_profile: List[int]
    measured: RatePair
    closed_form: RatePair
    relative_error_r1: float
    relative_error_r2: float
    converged: bool
    server_bits: int
    helper_bits: Dict[int, int]
    decode_status: Dict[str, bool]
    printed_r1: Optional[float] = None
    relative_error_printed_r1: Optional[float] = None

    @property
    def decode_ok(self) -> bool:
        return all(self.decode_status.values())
