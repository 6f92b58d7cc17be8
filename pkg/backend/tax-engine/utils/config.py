"""
Runtime settings for the ASSETAX tax engine

Values come from the environment, optionally seeded from a .env file.
"""

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv


@dataclass(frozen=True)
class Settings:
    log_level: str = "INFO"
    log_dir: Optional[str] = None

    # Numerical tolerances
    quad_abs_tol: float = 1e-8
    tail_prob: float = 1e-12
    root_tol: float = 1e-10
    richardson_tol: float = 1e-6

    sweep_workers: int = 1
    seed: int = 20240601


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    return float(raw) if raw not in (None, "") else default


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    return int(raw) if raw not in (None, "") else default


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Build settings once per process."""
    load_dotenv()
    return Settings(
        log_level=os.getenv("ASSETAX_LOG_LEVEL", "INFO"),
        log_dir=os.getenv("ASSETAX_LOG_DIR") or None,
        quad_abs_tol=_env_float("ASSETAX_QUAD_ABS_TOL", 1e-8),
        tail_prob=_env_float("ASSETAX_TAIL_PROB", 1e-12),
        root_tol=_env_float("ASSETAX_ROOT_TOL", 1e-10),
        richardson_tol=_env_float("ASSETAX_RICHARDSON_TOL", 1e-6),
        sweep_workers=max(1, _env_int("ASSETAX_SWEEP_WORKERS", 1)),
        seed=_env_int("ASSETAX_SEED", 20240601),
    )
