from functools import lru_cache
from pydantic_settings import BaseSettings
from pydantic import field_validator
from dotenv import load_dotenv
import logging
import os
import sys

logger = logging.getLogger(__name__)

if os.path.exists(".env"):
    load_dotenv(".env", override=True)
else:
    load_dotenv()

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class Settings(BaseSettings):
    """Application settings."""
    PROJECT_NAME: str = "Single-Pixel Imaging Benchmark"

    # Environment
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"

    # Experiment execution
    WORKERS: int = 1
    ORDERING_WORKERS: int = 1
    OUTPUT_DIR: str = "results"

    # Write a per-reconstruction iteration trace next to the reconstructions
    DEBUG_TRACE: bool = False

    @field_validator("LOG_LEVEL")
    def validate_log_level(cls, v: str) -> str:
        level = v.strip().upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level {v!r}")
        return level

    @field_validator("WORKERS", "ORDERING_WORKERS")
    def validate_workers(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Worker count must be at least 1")
        return v


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


def configure_logging(level: str = "INFO") -> None:
    """Configure root logging once for CLI and server entry points."""
    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stdout)],
        force=True,
    )
    # numerical libraries are chatty at DEBUG
    logging.getLogger("PIL").setLevel(logging.WARNING)
    logging.getLogger("uvicorn").setLevel(logging.INFO)
