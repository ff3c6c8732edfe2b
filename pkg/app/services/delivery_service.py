"""
Delivery Service - coded delivery for the S&C, A, B and hybrid schemes

Senders emit XOR messages in canonical order: subsets by size ascending,
then bitmask ascending. On the server link of the two-layer schemes j breaks
ties after the bitmask. Receivers decode from their own cache, their link's
transcript and the public placement metadata only.
"""
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from app.errors import ConfigError, DecodeFailure, HelperMissingBits, InvalidShare, InvalidSimulation
from app.models.cache import CacheAllocation, HybridAllocation
from app.models.network import NodeId, SimulationConfig, ValidatedConfig, require_validated, validate_simulation
from app.models.subfile import SubfilePartition
from app.models.transcript import (
    DeliveryContext,
    DeliveryOutcome,
    FileLibrary,
    LinkLayer,
    Message,
    Segment,
    Transcript,
)
from app.services.partition_service import partition, split_by_pivot
from app.services.placement_service import file_library


def subset_order(candidates: Iterable[int]) -> List[int]:
    """Size ascending, then bitmask ascending."""
    return sorted(set(candidates), key=lambda mask: (bin(mask).count("1"), mask))


def _positions(mask: int, width: int) -> List[int]:
    return [p for p in range(width) if mask >> p & 1]


class NodeMemory:
    """
    What one node knows of each file: a known-mask and the bit values.

    Starts from the node's cached bits across the given allocations and grows
    as the node decodes.
    """

    def __init__(self, node: NodeId, library: FileLibrary, allocations: Sequence[CacheAllocation]):
        self.node = node
        self._library = library
        self._allocations = tuple(allocations)
        self._known: Dict[int, np.ndarray] = {}
        self._values: Dict[int, np.ndarray] = {}

    def _ensure(self, d: int) -> None:
        if d in self._known:
            return
        known = np.zeros(self._library.file_bits, dtype=bool)
        values = np.zeros(self._library.file_bits, dtype=np.uint8)
        source = self._library.file(d)
        for alloc in self._allocations:
            if self.node in alloc.caches:
                cached = alloc.bits(self.node, d)
                known[cached] = True
                values[cached] = source[cached]
        self._known[d] = known
        self._values[d] = values

    def missing(self, d: int, bits: np.ndarray) -> np.ndarray:
        self._ensure(d)
        return bits[~self._known[d][bits]]

    def read(self, d: int, bits: np.ndarray) -> np.ndarray:
        self._ensure(d)
        return self._values[d][bits]

    def learn(self, d: int, bits: np.ndarray, values: np.ndarray) -> None:
        self._ensure(d)
        self._known[d][bits] = True
        self._values[d][bits] = values

    def state(self, d: int) -> Tuple[np.ndarray, np.ndarray]:
        self._ensure(d)
        return self._known[d], self._values[d]


# ========== Message construction and decoding ==========

def build_message(
    layer: LinkLayer,
    helper: int,
    subset: int,
    j: int,
    segments: List[Segment],
    read: Callable[[Segment], np.ndarray],
) -> Optional[Message]:
    """XOR of the segments zero-padded to the longest; None when every segment is empty."""
    segments = [s for s in segments if s.length]
    if not segments:
        return None
    payload = np.zeros(max(s.length for s in segments), dtype=np.uint8)
    for segment in segments:
        payload[: segment.length] ^= read(segment)
    return Message(layer=layer, helper=helper, subset=subset, j=j, segments=tuple(segments), payload=payload)


def decode_message(
    message: Message,
    receiver: NodeId,
    memory: NodeMemory,
    on_missing: Callable[[Segment, np.ndarray], None],
) -> None:
    """
    Recover the receiver's segment: payload prefix XOR every other segment's
    prefix, which the receiver must already know. Messages without a segment
    for the receiver are ignored.
    """
    own = message.segment_for(receiver)
    if own is None or own.length == 0:
        return
    length = own.length
    acc = message.payload[:length].copy()
    for other in message.segments:
        if other is own:
            continue
        prefix = other.bits[:length]
        lacking = memory.missing(other.file_index, prefix)
        if len(lacking):
            on_missing(other, lacking)
        acc[: len(prefix)] ^= memory.read(other.file_index, prefix)
    memory.learn(own.file_index, own.bits, acc)


def _helper_missing(helper: int) -> Callable[[Segment, np.ndarray], None]:
    def raise_missing(segment: Segment, lacking: np.ndarray) -> None:
        logger.error(f"H{helper} lacks {len(lacking)} bits of file {segment.file_index}")
        raise HelperMissingBits(helper, lacking.tolist(), segment.file_index)
    return raise_missing


# ========== Two-layer schemes (S&C and A) ==========

def _server_layer(
    config: ValidatedConfig,
    sim: SimulationConfig,
    alloc: CacheAllocation,
    library: FileLibrary,
    split_user_cache: bool,
) -> Transcript:
    """One message per (helper subset, j), ordered by subset size, then bitmask, then j."""
    k1, k2 = config.k1, config.k2
    helpers = [NodeId.helper(i) for i in range(1, k1 + 1)]
    parts: Dict[int, SubfilePartition] = {}
    demands: Dict[int, Dict[int, int]] = {}
    keyed = []

    for j in range(1, k2 + 1):
        demands[j] = {i: sim.demand(i, j, k2) for i in range(1, k1 + 1)}
        candidates = set()
        for i, d in demands[j].items():
            if d not in parts:
                parts[d] = partition(alloc, d, helpers)
            own = 1 << (i - 1)
            candidates.update(subset | own for subset, _ in parts[d].items() if not subset & own)
        keyed.extend((bin(s1).count("1"), s1, j) for s1 in candidates)

    transcript = Transcript(layer=LinkLayer.SERVER)
    for _, s1, j in sorted(keyed):
        segments = []
        for p in _positions(s1, k1):
            i = p + 1
            d = demands[j][i]
            rest = s1 & ~(1 << p)
            if split_user_cache:
                bits = split_by_pivot(parts[d], rest, NodeId.user(i, j), alloc).out_part
            else:
                bits = parts[d].bits_of(rest)
            segments.append(Segment(receiver=NodeId.helper(i), file_index=d, bits=bits))
        message = build_message(
            LinkLayer.SERVER, 0, s1, j, segments, lambda s: library.file(s.file_index)[s.bits]
        )
        if message is not None:
            transcript.append(message)
    return transcript


def _helper_layer(
    config: ValidatedConfig,
    sim: SimulationConfig,
    alloc: CacheAllocation,
    i: int,
    memory: NodeMemory,
) -> Transcript:
    """Helper i's broadcast; every transmitted bit must be cached or recovered from the server."""
    k2 = config.k2
    users = [NodeId.user(i, j) for j in range(1, k2 + 1)]
    demands = {j: sim.demand(i, j, k2) for j in range(1, k2 + 1)}
    parts: Dict[int, SubfilePartition] = {}
    candidates = set()
    for j, d in demands.items():
        if d not in parts:
            parts[d] = partition(alloc, d, users)
        own = 1 << (j - 1)
        candidates.update(subset | own for subset, _ in parts[d].items() if not subset & own)

    def read(segment: Segment) -> np.ndarray:
        lacking = memory.missing(segment.file_index, segment.bits)
        if len(lacking):
            _helper_missing(i)(segment, lacking)
        return memory.read(segment.file_index, segment.bits)

    transcript = Transcript(layer=LinkLayer.HELPER, helper=i)
    for s2 in subset_order(candidates):
        segments = [
            Segment(receiver=NodeId.user(i, p + 1), file_index=demands[p + 1], bits=parts[demands[p + 1]].bits_of(s2 & ~(1 << p)))
            for p in _positions(s2, k2)
        ]
        message = build_message(LinkLayer.HELPER, i, s2, 0, segments, read)
        if message is not None:
            transcript.append(message)
    return transcript


def _two_layer(
    config: ValidatedConfig,
    sim: SimulationConfig,
    alloc: CacheAllocation,
    library: FileLibrary,
    split_user_cache: bool,
) -> Tuple[Transcript, Dict[int, Transcript]]:
    server = _server_layer(config, sim, alloc, library, split_user_cache)
    helpers = {}
    for i in range(1, config.k1 + 1):
        helper = NodeId.helper(i)
        memory = NodeMemory(helper, library, (alloc,))
        for message in server.messages:
            decode_message(message, helper, memory, _helper_missing(i))
        helpers[i] = _helper_layer(config, sim, alloc, i, memory)
    return server, helpers


# ========== Scheme B ==========

def _server_coded_forwarding(
    config: ValidatedConfig,
    sim: SimulationConfig,
    alloc: CacheAllocation,
    library: FileLibrary,
) -> Tuple[Transcript, Dict[int, Transcript]]:
    """
    Server codes across all K1*K2 users; helper i forwards each message
    truncated to the longest segment of its attached users.
    """
    k1, k2 = config.k1, config.k2
    users = [NodeId.user(i, j) for i in range(1, k1 + 1) for j in range(1, k2 + 1)]
    demands = [sim.demand(u.i, u.j, k2) for u in users]
    parts: Dict[int, SubfilePartition] = {}
    candidates = set()
    for position, d in enumerate(demands):
        if d not in parts:
            parts[d] = partition(alloc, d, users)
        own = 1 << position
        candidates.update(subset | own for subset, _ in parts[d].items() if not subset & own)

    server = Transcript(layer=LinkLayer.SERVER)
    for s3 in subset_order(candidates):
        segments = [
            Segment(receiver=users[p], file_index=demands[p], bits=parts[demands[p]].bits_of(s3 & ~(1 << p)))
            for p in _positions(s3, len(users))
        ]
        message = build_message(
            LinkLayer.SERVER, 0, s3, 0, segments, lambda s: library.file(s.file_index)[s.bits]
        )
        if message is not None:
            server.append(message)

    helpers = {}
    for i in range(1, k1 + 1):
        forwarded = Transcript(layer=LinkLayer.HELPER, helper=i)
        for message in server.messages:
            attached = [s.length for s in message.segments if s.receiver.i == i]
            if not attached or max(attached) == 0:
                continue
            forwarded.append(Message(
                layer=LinkLayer.HELPER,
                helper=i,
                subset=message.subset,
                j=0,
                segments=message.segments,
                payload=message.payload[: max(attached)].copy(),
            ))
        helpers[i] = forwarded
    return server, helpers


# ========== Public operations ==========

def _prepare(config: ValidatedConfig, sim: SimulationConfig, *allocations: CacheAllocation) -> FileLibrary:
    config = require_validated(config)
    validate_simulation(config, sim)
    for alloc in allocations:
        if alloc.library_size != config.n or alloc.offset + alloc.file_bits > sim.file_bits:
            raise InvalidSimulation(
                f"allocation covers N={alloc.library_size}, bits [{alloc.offset}, {alloc.offset + alloc.file_bits}) "
                f"but the simulation has N={config.n}, F={sim.file_bits}"
            )
    return file_library(sim.seed, config.n, sim.file_bits)


def _finish(
    scheme: str,
    config: ValidatedConfig,
    sim: SimulationConfig,
    library: FileLibrary,
    allocations: Tuple[CacheAllocation, ...],
    server: Transcript,
    helpers: Dict[int, Transcript],
) -> DeliveryOutcome:
    outcome = DeliveryOutcome(
        scheme=scheme,
        file_bits=sim.file_bits,
        server=server,
        helpers=helpers,
        context=DeliveryContext(config=config, sim=sim, library=library, allocations=allocations),
    )
    for i in range(1, config.k1 + 1):
        for j in range(1, config.k2 + 1):
            outcome.decoded[(i, j)] = decode_user(outcome, i, j)

    rates = outcome.rates
    logger.info(
        f"{scheme} delivery: server {server.total_bits} bits in {len(server.messages)} messages, "
        f"worst helper {max(t.total_bits for t in helpers.values())} bits; r1={rates.r1:.6f} r2={rates.r2:.6f}; "
        f"{len(outcome.decoded)} users decoded"
    )
    return outcome


def deliver_sc(config: ValidatedConfig, sim: SimulationConfig, alloc: CacheAllocation) -> DeliveryOutcome:
    """First layer carries only the parts of each subfile the destination user does not cache."""
    library = _prepare(config, sim, alloc)
    server, helpers = _two_layer(config, sim, alloc, library, split_user_cache=True)
    return _finish("sc", config, sim, library, (alloc,), server, helpers)


def deliver_scheme_a(config: ValidatedConfig, sim: SimulationConfig, alloc: CacheAllocation) -> DeliveryOutcome:
    library = _prepare(config, sim, alloc)
    server, helpers = _two_layer(config, sim, alloc, library, split_user_cache=False)
    return _finish("a", config, sim, library, (alloc,), server, helpers)


def deliver_scheme_b(config: ValidatedConfig, sim: SimulationConfig, alloc: CacheAllocation) -> DeliveryOutcome:
    """Helper caches are ignored."""
    library = _prepare(config, sim, alloc)
    server, helpers = _server_coded_forwarding(config, sim, alloc, library)
    return _finish("b", config, sim, library, (alloc,), server, helpers)


def deliver_hybrid(
    config: ValidatedConfig,
    sim: SimulationConfig,
    alloc_pair: HybridAllocation,
    alpha: float,
    beta: float,
) -> DeliveryOutcome:
    """
    S&C over bits [0, split) and scheme B over [split, F); transcripts are
    concatenated per link and rates stay normalized by the full F.
    """
    for label, value in (("alpha", alpha), ("beta", beta)):
        if not (0.0 <= value <= 1.0):
            raise InvalidShare(f"{label}={value} outside [0, 1]", field=label, value=value)
    if alloc_pair.split != int(np.floor(alpha * sim.file_bits)):
        raise InvalidShare(
            f"allocation split {alloc_pair.split} does not match alpha={alpha} for F={sim.file_bits}",
            field="alpha",
            value=alpha,
        )
    library = _prepare(config, sim, alloc_pair.first, alloc_pair.second)
    first_server, first_helpers = _two_layer(config, sim, alloc_pair.first, library, split_user_cache=True)
    second_server, second_helpers = _server_coded_forwarding(config, sim, alloc_pair.second, library)

    server = Transcript(layer=LinkLayer.SERVER)
    server.extend(first_server)
    server.extend(second_server)
    helpers = {}
    for i in range(1, config.k1 + 1):
        helpers[i] = Transcript(layer=LinkLayer.HELPER, helper=i)
        helpers[i].extend(first_helpers[i])
        helpers[i].extend(second_helpers[i])
    return _finish(
        f"hybrid({alpha:g},{beta:g})",
        config,
        sim,
        library,
        (alloc_pair.first, alloc_pair.second),
        server,
        helpers,
    )


def decode_user(outcome: DeliveryOutcome, i: int, j: int) -> np.ndarray:
    """
    Recover f_{d_{i,j}} from user (i, j)'s cache and helper i's transcript.

    Raises DecodeFailure with the first undelivered or mismatching bit.
    """
    ctx = outcome.context
    if ctx is None:
        raise ConfigError("delivery outcome carries no placement context")
    user = NodeId.user(i, j)
    user.check_bounds(ctx.config)
    d = ctx.sim.demand(i, j, ctx.config.k2)
    memory = NodeMemory(user, ctx.library, ctx.allocations)

    def cannot_cancel(segment: Segment, lacking: np.ndarray) -> None:
        logger.error(f"{user} cannot cancel {len(lacking)} interfering bits of file {segment.file_index}")
        raise DecodeFailure(
            str(user), f"cache lacks bits of file {segment.file_index} needed to cancel interference", int(lacking[0])
        )

    link = outcome.helpers.get(i)
    for message in (link.messages if link else []):
        decode_message(message, user, memory, cannot_cancel)

    known, values = memory.state(d)
    if not known.all():
        first = int(np.flatnonzero(~known)[0])
        logger.error(f"{user} never received bit {first} of file {d}")
        raise DecodeFailure(str(user), f"bit of file {d} neither cached nor delivered", first)
    mismatch = np.flatnonzero(values != ctx.library.file(d))
    if len(mismatch):
        logger.error(f"{user} decoded file {d} with {len(mismatch)} wrong bits")
        raise DecodeFailure(str(user), f"decoded file {d} differs from the original", int(mismatch[0]))
    return values.copy()


# ========== Transcript dump ==========

def _message_record(message: Message, include_payload: bool) -> dict:
    record = {
        "layer": message.layer.value,
        "helper": message.helper,
        "subset": message.subset,
        "j": message.j,
        "length": message.length,
        "segments": [
            {"receiver": str(s.receiver), "file": s.file_index, "length": s.length} for s in message.segments
        ],
    }
    if include_payload:
        record["payload"] = "".join(map(str, message.payload.tolist()))
    return record


def dump_transcripts(outcome: DeliveryOutcome, include_payload: bool = False) -> List[dict]:
    """One record per message: server link first, then helpers ascending."""
    records = [_message_record(m, include_payload) for m in outcome.server.messages]
    for i in sorted(outcome.helpers):
        records.extend(_message_record(m, include_payload) for m in outcome.helpers[i].messages)
    return records
