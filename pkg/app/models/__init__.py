"""
Models package - imports all models for easy access
"""
from app.models.network import (
    NetworkConfig, ValidatedConfig, SimulationConfig, NodeId, NodeRole, RatePair, validate,
)
from app.models.cache import CacheAllocation, HybridAllocation
from app.models.subfile import SubfilePartition, SubfileSplit
from app.models.transcript import (
    Segment, Message, Transcript, LinkLayer, FileLibrary, DeliveryContext, DeliveryOutcome, SimulationReport,
)
from app.models.bounds import Regime, SubRegime, RegimeLabel, BoundSet, TupleEvaluation
from app.models.gap import InequalityCheck, WitnessCheck, GapReport, SweepSummary, SweepResult
from app.models.region import SchemeKind, SchemeId, FrontierPoint, Frontier, Dominance, Fig3Row

__all__ = [
    "NetworkConfig", "ValidatedConfig", "SimulationConfig", "NodeId", "NodeRole", "RatePair", "validate",
    "CacheAllocation", "HybridAllocation",
    "SubfilePartition", "SubfileSplit",
    "Segment", "Message", "Transcript", "LinkLayer", "FileLibrary", "DeliveryContext", "DeliveryOutcome", "SimulationReport",
    "Regime", "SubRegime", "RegimeLabel", "BoundSet", "TupleEvaluation",
    "InequalityCheck", "WitnessCheck", "GapReport", "SweepSummary", "SweepResult",
    "SchemeKind", "SchemeId", "FrontierPoint", "Frontier", "Dominance", "Fig3Row",
]
