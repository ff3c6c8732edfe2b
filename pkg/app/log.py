"""
Loguru configuration shared by the CLI and the HTTP API.
"""
import sys
from pathlib import Path
from typing import Optional

from loguru import logger

from app.config import settings

# Modules where a scientific invariant can fail; they get their own log file.
INVARIANT_MODULES = ("app.services.gap_service", "app.services.delivery_service")


def configure_logging(level: Optional[str] = None, colorize: bool = True) -> None:
    """
    Replace loguru's default handler with the toolkit's sinks.

    stdout is never used: machine-readable command output owns it.
    """
    logger.remove()

    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
        level=(level or settings.effective_log_level).upper(),
        colorize=colorize,
    )

    log_dir = Path(settings.log_dir)

    # File logging for production
    if settings.app_env == "production":
        logger.add(
            str(log_dir / "coded_cache_{time:YYYY-MM-DD}.log"),
            rotation="00:00",
            retention="30 days",
            compression="zip",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
            level="INFO",
        )

    # Invariant log (always enabled)
    logger.add(
        str(log_dir / "invariants_{time:YYYY-MM-DD}.log"),
        rotation="00:00",
        retention="7 days",
        filter=lambda record: record["name"] in INVARIANT_MODULES,
        format="{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {message}",
        level="INFO",
    )
