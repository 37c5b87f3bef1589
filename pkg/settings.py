"""
Environment-driven defaults.

Values come from a local .env file (python-dotenv) or the process
environment; CLI flags override both.
"""

import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

DEFAULT_QUADRATURE_ORDER = 128
DEFAULT_TRUNCATION_QUANTILE = 1.0 - 1e-8
DEFAULT_SEED = 20240601
DEFAULT_WORKERS = 1
DEFAULT_LOG_LEVEL = "INFO"

# Solver tolerances and caps
MULTIPLIER_XTOL = 1e-12      # on log(lambda)
RATE_XTOL = 1e-10            # on the outer fixed point
MAX_ITERATIONS = 200
POWER_TOLERANCE = 1e-6
RATE_TIE_TOLERANCE = 1e-12


def env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"Environment variable {name} must be an integer, got {raw!r}")


def env_str(name: str, default: str) -> str:
    raw = os.getenv(name)
    return default if raw is None or raw.strip() == "" else raw.strip()


def quadrature_order() -> int:
    return env_int("SECRECY_QUADRATURE_ORDER", DEFAULT_QUADRATURE_ORDER)


def workers(override: Optional[int] = None) -> int:
    if override is not None:
        return override
    return env_int("SECRECY_WORKERS", DEFAULT_WORKERS)


def seed(override: Optional[int] = None) -> int:
    if override is not None:
        return override
    return env_int("SECRECY_SEED", DEFAULT_SEED)


def log_level(override: Optional[str] = None) -> str:
    if override:
        return override.upper()
    return env_str("SECRECY_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()
