"""
Runtime configuration.

Values come from the environment (or a .env file next to the working
directory) and fall back to module defaults. Override any of them with
DIHEDRAL_<NAME>, e.g. DIHEDRAL_QUAD_ORDER=128.
"""
import os
import logging
from dataclasses import dataclass, asdict
from typing import Callable, Dict

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

load_dotenv()

ENV_PREFIX = "DIHEDRAL_"

DEFAULTS = {
    "quad_order": 64,
    "rel_tol": 1e-10,
    "abs_tol": 1e-12,
    "max_step": 0.05,
    "max_steps": 200000,
    "grid": 200,
    "workers": 4,
    "log_level": "INFO",
}

_PARSERS: Dict[str, Callable] = {
    "quad_order": int,
    "rel_tol": float,
    "abs_tol": float,
    "max_step": float,
    "max_steps": int,
    "grid": int,
    "workers": int,
    "log_level": lambda s: s.strip().upper(),
}


@dataclass(frozen=True)
class Settings:
    """Resolved configuration values."""
    quad_order: int
    rel_tol: float
    abs_tol: float
    max_step: float
    max_steps: int
    grid: int
    workers: int
    log_level: str

    def to_dict(self) -> Dict:
        return asdict(self)


def _load_value(name: str):
    """Read one setting from the environment, falling back to its default."""
    env_var = f"{ENV_PREFIX}{name.upper()}"
    raw = os.getenv(env_var)
    if raw is None or raw == "":
        return DEFAULTS[name]
    try:
        return _PARSERS[name](raw)
    except ValueError:
        logger.warning(f"Ignoring malformed {env_var}={raw!r}; using {DEFAULTS[name]}")
        return DEFAULTS[name]


def get_settings() -> Settings:
    """Build settings from the current environment."""
    return Settings(**{name: _load_value(name) for name in DEFAULTS})


def default_integrator_config():
    """IntegratorConfig built from the configured tolerances."""
    from services.numerics import IntegratorConfig

    settings = get_settings()
    return IntegratorConfig(
        rel_tol=settings.rel_tol,
        abs_tol=settings.abs_tol,
        max_step=settings.max_step,
        max_steps=settings.max_steps,
    )
