"""Space-time correlations of the Gaussian harness interface: closed forms, dense oracles, Monte Carlo."""

from .errors import (
    DomainError,
    FiniteSizeError,
    HarnessError,
    InsufficientDataError,
    OracleSizeError,
    ParityError,
    QuadratureError,
    ZeroModeError,
)
from .exact import CorrelationKind, asymptotic, exact

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CorrelationKind",
    "exact",
    "asymptotic",
    "HarnessError",
    "DomainError",
    "ParityError",
    "ZeroModeError",
    "QuadratureError",
    "OracleSizeError",
    "FiniteSizeError",
    "InsufficientDataError",
]
