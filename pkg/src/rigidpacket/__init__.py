"""Nonspreading chirped Dirac wavepackets: closed forms, rest-frame transport and diagnostics."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CoverageError,
    DomainError,
    MaskedPointError,
    MultivaluedInverseError,
    NoDampingError,
    PacketError,
    QuadratureFailure,
    SeriesRangeError,
    WedgeError,
)
from .fields import FieldProfile, RindlerPoint, SpacetimePoint  # noqa: E402
from .states import PacketParams  # noqa: E402

__all__ = [
    "__version__",
    "CoverageError",
    "DomainError",
    "MaskedPointError",
    "MultivaluedInverseError",
    "NoDampingError",
    "PacketError",
    "QuadratureFailure",
    "SeriesRangeError",
    "WedgeError",
    "FieldProfile",
    "RindlerPoint",
    "SpacetimePoint",
    "PacketParams",
]
