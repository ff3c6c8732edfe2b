"""
Network Model - topology, memories, simulation settings and node identities

A NetworkConfig is raw user input. ValidatedConfig is the only form the
services accept: constructing one runs every invariant check, so holding one
is proof of validation.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Any, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from app.errors import InvalidMemory, InvalidSimulation, InvalidTopology, UnknownNode, UnvalidatedConfig

MAX_SEED = 2**64


class NetworkConfig(BaseModel):
    """(N, K1, K2, M1, M2): library size, topology and normalized memories."""

    model_config = ConfigDict(frozen=True)

    library_size: int = Field(..., description="N, number of files")
    helper_count: int = Field(..., description="K1, helpers attached to the server")
    users_per_helper: int = Field(..., description="K2, users attached to each helper")
    helper_memory: float = Field(..., description="M1, in files")
    user_memory: float = Field(..., description="M2, in files")

    # Short aliases used throughout the formulas
    @property
    def n(self) -> int:
        return self.library_size

    @property
    def k1(self) -> int:
        return self.helper_count

    @property
    def k2(self) -> int:
        return self.users_per_helper

    @property
    def m1(self) -> float:
        return self.helper_memory

    @property
    def m2(self) -> float:
        return self.user_memory

    @property
    def user_count(self) -> int:
        return self.helper_count * self.users_per_helper

    def base_fields(self) -> dict:
        return {name: getattr(self, name) for name in NetworkConfig.model_fields}

    def with_memories(self, m1: float, m2: float) -> "NetworkConfig":
        return type(self)(**{**self.base_fields(), "helper_memory": m1, "user_memory": m2})


class ValidatedConfig(NetworkConfig):
    """NetworkConfig whose invariants have been checked."""

    @model_validator(mode="after")
    def _check_invariants(self) -> "ValidatedConfig":
        check_network(self)
        return self

    @computed_field
    @property
    def gap_eligible(self) -> bool:
        return self.library_size >= self.helper_count * self.users_per_helper


def check_network(config: NetworkConfig) -> None:
    """Raise on any NetworkConfig invariant violation."""
    if config.helper_count < 2 or config.users_per_helper < 2:
        raise InvalidTopology(
            f"K1 and K2 must both be >= 2 (got K1={config.helper_count}, K2={config.users_per_helper})",
            k1=config.helper_count,
            k2=config.users_per_helper,
        )
    if config.library_size < 1:
        raise InvalidTopology(f"library must hold at least one file (got N={config.library_size})")
    n = config.library_size
    for label, value in (("M1", config.helper_memory), ("M2", config.user_memory)):
        if not (0.0 <= value <= n):
            raise InvalidMemory(f"{label}={value} outside [0, N={n}]", field=label, value=value)


def validate(config: Union[NetworkConfig, dict]) -> ValidatedConfig:
    """
    Validate a network configuration.

    Idempotent: a ValidatedConfig comes back unchanged.
    """
    if isinstance(config, ValidatedConfig):
        return config
    if isinstance(config, dict):
        return ValidatedConfig(**{k: v for k, v in config.items() if k != "gap_eligible"})
    return ValidatedConfig(**config.base_fields())


def require_validated(config: Any) -> ValidatedConfig:
    if not isinstance(config, ValidatedConfig):
        raise UnvalidatedConfig(
            f"expected ValidatedConfig, got {type(config).__name__}; call validate() first"
        )
    return config


# ========== Simulation ==========

class SimulationConfig(BaseModel):
    """Bit-level simulation parameters: F, seed and one demand per user."""

    model_config = ConfigDict(frozen=True)

    file_bits: int
    seed: int = 0
    request_profile: Tuple[int, ...] = Field(
        ..., description="d_{i,j} in [1..N], ordered i-major then j (user (i,j) at (i-1)*K2 + (j-1))"
    )

    def demand(self, i: int, j: int, k2: int) -> int:
        """1-based file index requested by user (i, j)."""
        return self.request_profile[(i - 1) * k2 + (j - 1)]


def validate_simulation(config: ValidatedConfig, sim: SimulationConfig) -> SimulationConfig:
    """Check F >= N, the seed range and the request profile against the topology."""
    require_validated(config)
    if sim.file_bits < config.library_size:
        raise InvalidSimulation(
            f"file_bits F={sim.file_bits} must be >= N={config.library_size}",
            file_bits=sim.file_bits,
        )
    if not (0 <= sim.seed < MAX_SEED):
        raise InvalidSimulation(f"seed {sim.seed} is not a 64-bit unsigned integer")
    if len(sim.request_profile) != config.user_count:
        raise InvalidSimulation(
            f"request profile has {len(sim.request_profile)} entries, expected K1*K2={config.user_count}"
        )
    for position, d in enumerate(sim.request_profile):
        if not (1 <= d <= config.library_size):
            raise InvalidSimulation(
                f"request {d} at position {position} outside [1, {config.library_size}]",
                position=position,
                request=d,
            )
    return sim


# ========== Nodes ==========

class NodeRole(str, Enum):
    """Node kinds; the integer codes key the placement random streams."""
    SERVER = "server"
    HELPER = "helper"
    USER = "user"

    @property
    def code(self) -> int:
        return {"server": 0, "helper": 1, "user": 2}[self.value]


@dataclass(frozen=True, order=True)
class NodeId:
    role: NodeRole
    i: int = 0
    j: int = 0

    @classmethod
    def server(cls) -> "NodeId":
        return cls(NodeRole.SERVER)

    @classmethod
    def helper(cls, i: int) -> "NodeId":
        return cls(NodeRole.HELPER, i, 0)

    @classmethod
    def user(cls, i: int, j: int) -> "NodeId":
        return cls(NodeRole.USER, i, j)

    def check_bounds(self, config: NetworkConfig) -> None:
        ok = {
            NodeRole.SERVER: self.i == 0 and self.j == 0,
            NodeRole.HELPER: 1 <= self.i <= config.helper_count and self.j == 0,
            NodeRole.USER: 1 <= self.i <= config.helper_count and 1 <= self.j <= config.users_per_helper,
        }[self.role]
        if not ok:
            raise UnknownNode(f"{self} outside topology K1={config.helper_count}, K2={config.users_per_helper}")

    def __str__(self) -> str:
        if self.role is NodeRole.SERVER:
            return "S"
        if self.role is NodeRole.HELPER:
            return f"H{self.i}"
        return f"U{self.i},{self.j}"


# ========== Rates ==========

class RatePair(BaseModel):
    """Normalized (by F) delivery rates: server link r1, worst helper link r2."""

    model_config = ConfigDict(frozen=True)

    r1: float = Field(..., ge=0.0)
    r2: float = Field(..., ge=0.0)
