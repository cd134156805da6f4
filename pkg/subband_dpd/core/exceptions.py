"""Custom exception classes for the simulator."""

from typing import Any, Optional


class SubbandDpdError(Exception):
    """Base exception for all simulator errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        error_code: Optional[str] = None,
        details: Optional[dict[str, Any]] = None,
    ) -> None:
        """Initialize simulator exception.

        Args:
            message: Human-readable error message
            exit_code: Process exit status used by the CLI
            error_code: Machine-readable error code
            details: Additional error details
        """
        super().__init__(message)
        self.message = message
        self.exit_code = exit_code
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}


class ConfigError(SubbandDpdError):
    """Exception for invalid scenario or fixture files."""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        details: Optional[dict[str, Any]] = None,
    ) -> None:
        """Initialize configuration exception."""
        error_details = details or {}
        if field:
            error_details["field"] = field
        if line is not None:
            error_details["line"] = line

        super().__init__(
            message=message,
            exit_code=2,
            error_code="CONFIG_ERROR",
            details=error_details,
        )
        self.field = field
        self.line = line


class DomainError(SubbandDpdError):
    """Base for errors raised by the numerical operations."""

    error_code_default = "DOMAIN_ERROR"

    def __init__(
        self,
        message: str,
        details: Optional[dict[str, Any]] = None,
    ) -> None:
        """Initialize domain exception."""
        super().__init__(
            message=message,
            exit_code=3,
            error_code=self.error_code_default,
            details=details,
        )


class InvalidSignalError(DomainError):
    """Signal violates its sample-rate, length or finiteness invariants."""

    error_code_default = "INVALID_SIGNAL"


class OverlapError(DomainError):
    """Component carriers overlap in frequency."""

    error_code_default = "CARRIER_OVERLAP"


class RateError(DomainError):
    """Sample rate is mismatched, aliasing, or above the configured maximum."""

    error_code_default = "RATE_ERROR"


class DesignError(DomainError):
    """Filter requirements cannot be met within the tap budget."""

    error_code_default = "FILTER_DESIGN_ERROR"


class AlignError(DomainError):
    """Observation could not be synchronized with the reference."""

    error_code_default = "ALIGNMENT_ERROR"


class BandError(DomainError):
    """Sub-band or measurement band is outside what the model supports."""

    error_code_default = "BAND_ERROR"


class OrderError(DomainError):
    """Nonlinearity order has wrong parity or range."""

    error_code_default = "ORDER_ERROR"


class DegenerateBasisError(DomainError):
    """Basis columns are linearly dependent at working precision."""

    error_code_default = "DEGENERATE_BASIS"


class ShapeError(DomainError):
    """Array dimensions do not match."""

    error_code_default = "SHAPE_MISMATCH"


class DivergenceError(DomainError):
    """Adaptive learning residual grew beyond the divergence threshold."""

    error_code_default = "DIVERGENCE"


class ZeroDivideError(DomainError):
    """Closed-form solution has a vanishing denominator."""

    error_code_default = "ZERO_DENOMINATOR"


class UnsupportedOrderError(DomainError):
    """Complexity model requested for an order that is not tabulated."""

    error_code_default = "UNSUPPORTED_ORDER"
