"""
Exception hierarchy for the coded-cache toolkit.

ConfigError subclasses are argument/validation problems (CLI exit 1, HTTP 422).
InvariantViolation subclasses mean a scientific invariant failed at runtime
(CLI exit 2, HTTP 500).

None of these derive from ValueError: pydantic wraps ValueError raised inside
validators, and callers must see the domain error itself.
"""
from typing import Any, Optional, Sequence


class CachingError(Exception):
    """Root of every error raised by the toolkit."""

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            **{k: _jsonable(v) for k, v in self.context.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):  # numpy scalar
        return value.item()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


# ========== Validation errors ==========

class ConfigError(CachingError):
    """Input rejected before any computation ran."""


class InvalidTopology(ConfigError):
    pass


class InvalidMemory(ConfigError):
    pass


class InvalidSimulation(ConfigError):
    pass


class InvalidShare(ConfigError):
    """alpha or beta outside [0, 1]."""


class DomainError(ConfigError):
    """Rate function evaluated outside its domain."""


class UnknownNode(ConfigError):
    pass


class PivotInFamily(ConfigError):
    pass


class NotGapEligible(ConfigError):
    pass


class UnvalidatedConfig(ConfigError):
    pass


# ========== Invariant violations ==========

class InvariantViolation(CachingError):
    """A property the scheme guarantees did not hold."""


class HelperMissingBits(InvariantViolation):
    def __init__(self, helper: int, bit_indices: Sequence[int], file_index: int):
        shown = list(bit_indices[:8])
        super().__init__(
            f"helper H{helper} lacks {len(bit_indices)} bit(s) of file {file_index} "
            f"needed for its broadcast, first {shown}",
            helper=helper,
            file_index=file_index,
            missing=len(bit_indices),
            bit_indices=shown,
        )
        self.helper = helper
        self.bit_indices = list(bit_indices)


class DecodeFailure(InvariantViolation):
    def __init__(self, user: Any, reason: str, bit_index: Optional[int] = None):
        where = f" at bit {bit_index}" if bit_index is not None else ""
        super().__init__(
            f"user {user} failed to decode{where}: {reason}",
            user=user,
            bit_index=bit_index,
            reason=reason,
        )
        self.user = user
        self.bit_index = bit_index


class EnvelopeViolation(InvariantViolation):
    def __init__(self, component: str, value: float, bound: float, m1: float, m2: float):
        super().__init__(
            f"hybrid {component}={value:.12g} exceeds closed-form envelope {bound:.12g} "
            f"at (M1={m1}, M2={m2})",
            component=component,
            value=value,
            bound=bound,
            m1=m1,
            m2=m2,
        )
        self.component = component
        self.value = value
        self.bound = bound
