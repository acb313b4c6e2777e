"""Exception types shared across the package."""


class PacketError(Exception):
    """Base class for every error raised by rigidpacket."""


class DomainError(PacketError, ValueError):
    """An argument lies outside the region where the quantity is defined."""


class QuadratureFailure(PacketError, ArithmeticError):
    def __init__(self, message, error_estimate=float("nan")):
        super().__init__(f"{message} (error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


class NoDampingError(DomainError):
    """The rapidity integral needs a positive size parameter to converge."""


class SeriesRangeError(PacketError, ArithmeticError):
    pass


class WedgeError(DomainError):
    """Point is not inside the right Rindler wedge."""


class MaskedPointError(PacketError):
    """The point sits in a masked region (light cone, Bessel zero)."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class MultivaluedInverseError(PacketError, ValueError):
    def __init__(self, message, bracket):
        super().__init__(f"{message}; bracket={bracket}")
        self.bracket = bracket


class CoverageError(PacketError):
    """Too few unmasked cells to compute the requested quantity."""
