"""Sensitivity-aware retransmission simulator and protocol library."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, FormatError, StateError

__all__ = [
    "__version__",
    "ConfigError",
    "DomainError",
    "FormatError",
    "StateError",
]
