"""Custom exceptions for the relational-time simulator."""


class RelationalTimeException(Exception):
    """Base exception for all application errors."""

    pass


class ConfigurationError(RelationalTimeException):
    """Configuration error."""

    pass


class DimensionMismatchError(RelationalTimeException):
    """Operands live on incompatible tensor-product spaces."""

    pass


class LatticeIndexError(RelationalTimeException):
    """Clock lattice index or region boundary is out of range."""

    pass


class CommensurabilityError(RelationalTimeException):
    """Requested phase or frequency is not realizable on the clock lattice."""

    def __init__(self, message: str, nearest_phase: float | None = None):
        super().__init__(message)
        self.nearest_phase = nearest_phase


class InvalidStateError(RelationalTimeException):
    """State vector cannot be used (zero norm, not normalized, wrong size)."""

    pass


class MeasurementLayoutError(RelationalTimeException):
    """History state does not carry the measurements an operation needs."""

    pass


class NumericalInvariantError(RelationalTimeException):
    """A numerical invariant failed beyond its documented tolerance."""

    pass
