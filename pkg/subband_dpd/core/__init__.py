"""Core simulator modules."""

from subband_dpd.core.exceptions import (
    AlignError,
    BandError,
    ConfigError,
    DegenerateBasisError,
    DesignError,
    DivergenceError,
    DomainError,
    InvalidSignalError,
    OrderError,
    OverlapError,
    RateError,
    ShapeError,
    SubbandDpdError,
    UnsupportedOrderError,
    ZeroDivideError,
)

__all__ = [
    "SubbandDpdError",
    "ConfigError",
    "DomainError",
    "InvalidSignalError",
    "OverlapError",
    "RateError",
    "DesignError",
    "AlignError",
    "BandError",
    "OrderError",
    "DegenerateBasisError",
    "ShapeError",
    "DivergenceError",
    "ZeroDivideError",
    "UnsupportedOrderError",
]
