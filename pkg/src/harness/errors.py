"""Exception types shared across the package."""


class HarnessError(Exception):
    """Base class for all errors raised by this package."""


class ParityError(HarnessError, ValueError):
    """Spatial offset has the wrong parity for the requested correlation."""


class DomainError(HarnessError, ValueError):
    """Argument outside the domain where a formula is defined."""


class ZeroModeError(HarnessError, ValueError):
    """The Fourier mode is in the zero-mode orbit (flat, non-normalizable direction)."""


class QuadratureError(HarnessError, ArithmeticError):
    """A quadrature rule failed to reach the requested accuracy."""


class OracleSizeError(HarnessError, ValueError):
    """Dense quadratic form would exceed the size cap."""


class FiniteSizeError(HarnessError, ValueError):
    """Observable does not fit comfortably inside the finite torus."""


class InsufficientDataError(HarnessError, ValueError):
    """Not enough snapshots or blocks to form an estimate."""
