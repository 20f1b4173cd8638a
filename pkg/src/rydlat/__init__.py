"""Optical lattices from interaction-induced dressing of ground-state atom pairs."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ManifoldError,
    NumericalError,
    RydlatError,
)
from .params import TWO_PI, DressingParams, StandingWave, hz, to_hz  # noqa: E402

__all__ = [
    "ConfigError",
    "DressingParams",
    "ManifoldError",
    "NumericalError",
    "RydlatError",
    "StandingWave",
    "TWO_PI",
    "__version__",
    "hz",
    "to_hz",
]
