"""
Coded-Cache Toolkit Configuration
Loads all settings from environment variables (prefix CODED_CACHE_)
"""
import os
from functools import lru_cache
from typing import Literal, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    model_config = SettingsConfigDict(
        env_prefix="CODED_CACHE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # App Settings
    app_env: Literal["development", "production"] = "development"
    log_level: Optional[str] = None  # None -> DEBUG in development, INFO otherwise
    log_dir: str = "logs"

    # Simulation defaults
    default_file_bits: int = 4096
    default_seed: int = 0

    # Worker pool for sweeps and grid evaluation
    threads: int = os.cpu_count() or 1

    # Region / gap defaults
    frontier_resolution: int = 101
    gap_grid: int = 41

    # Numerical tolerances
    gap_tolerance: float = 1e-9          # slack >= -tol counts as pass
    bound_tolerance: float = 1e-9        # lower bound vs achievable rate
    envelope_tolerance: float = 1e-9     # hybrid rate vs closed-form envelope
    convergence_tolerance: float = 0.02  # measured vs closed-form, relative

    @property
    def effective_log_level(self) -> str:
        if self.log_level:
            return self.log_level.upper()
        return "DEBUG" if self.app_env == "development" else "INFO"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


settings = get_settings()
