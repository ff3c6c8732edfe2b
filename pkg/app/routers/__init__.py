"""
Routers package - API route handlers
"""
from app.routers.rates import router as rates_router
from app.routers.simulation import router as simulation_router
from app.routers.bounds import router as bounds_router
from app.routers.region import router as region_router

__all__ = ["rates_router", "simulation_router", "bounds_router", "region_router"]
