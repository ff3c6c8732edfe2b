"""
Services package - rates, bounds, gap certification, regions and bit-level simulation
"""
from app.services import rate_service
from app.services import bounds_service
from app.services import gap_service
from app.services import region_service
from app.services import placement_service
from app.services import partition_service
from app.services import delivery_service
from app.services import acceptance_service
from app.services.simulation_service import SimulationService, simulation_service, run_simulation

__all__ = [
    "rate_service",
    "bounds_service",
    "gap_service",
    "region_service",
    "placement_service",
    "partition_service",
    "delivery_service",
    "acceptance_service",
    "SimulationService",
    "simulation_service",
    "run_simulation",
]
