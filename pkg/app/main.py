"""
Coded-Cache Toolkit - HTTP API for two-layer decentralized coded caching

Main FastAPI Application Entry Point
Features:
- Closed-form rates for S&C, schemes A and B, hybrid and generalized
- Bit-level placement, delivery and decoding with measured rates
- Cut-set lower bounds, tuple upper bounds and case labels
- Order-optimality certification over memory grids
- Achievable-region frontiers and dominance checks
- Loguru structured logging
"""
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from loguru import logger

from app import __version__
from app.config import settings
from app.errors import ConfigError, InvariantViolation
from app.log import configure_logging
from app.routers import bounds_router, rates_router, region_router, simulation_router

configure_logging()


@asynccontextmanager
async def lifespan(app: FastAPI):
    """
    Lifespan context manager for startup/shutdown events.
    """
    logger.info(f"🚀 Starting Coded-Cache API ({settings.app_env} mode)")
    logger.info(f"🧮 Worker threads: {settings.threads}")
    logger.info(f"📐 Frontier resolution {settings.frontier_resolution}, gap grid {settings.gap_grid}")

    yield

    logger.info("👋 Shutting down Coded-Cache API")


app = FastAPI(
    title="Coded-Cache API",
    description="""
    Simulator and bound checker for hierarchical (server, helpers, users) coded caching.

    ## Features
    - 📊 Closed-form server and helper rates per scheme
    - 🧪 Bit-exact simulation with decode verification
    - 📉 Lower/upper bounds and order-optimality gap checks
    - 🗺️ Achievable-region frontiers
    """,
    version=__version__,
    lifespan=lifespan,
    docs_url="/docs" if settings.app_env != "production" else None,
    redoc_url="/redoc" if settings.app_env != "production" else None,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(rates_router)
app.include_router(simulation_router)
app.include_router(bounds_router)
app.include_router(region_router)


# ========== Error mapping ==========

@app.exception_handler(ConfigError)
async def config_error_handler(request: Request, exc: ConfigError):
    logger.warning(f"Rejected {request.url.path}: {exc.message}")
    return JSONResponse(status_code=422, content=exc.to_dict())


@app.exception_handler(InvariantViolation)
async def invariant_error_handler(request: Request, exc: InvariantViolation):
    logger.error(f"Invariant failed on {request.url.path}: {exc.message}")
    return JSONResponse(status_code=500, content=exc.to_dict())


@app.get("/")
async def root():
    """Health check endpoint."""
    return {
        "service": "Coded-Cache API",
        "status": "running",
        "version": __version__,
        "environment": settings.app_env,
    }


@app.get("/health")
async def health_check():
    return {
        "status": "healthy",
        "threads": settings.threads,
        "convergence_tolerance": settings.convergence_tolerance,
    }


# For development - run with: uvicorn app.main:app --reload
if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=8000,
        reload=True,
    )
