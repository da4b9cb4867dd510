"""Exception types shared across the package."""


class SpinBosonError(Exception):
    """Base class for all package errors."""


class ValidationError(SpinBosonError):
    """A parameter or configuration value is outside its allowed domain."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DimensionError(SpinBosonError):
    """A requested Hilbert-space dimension exceeds the configured cap."""

    def __init__(self, dim, cap):
        self.dim = dim
        self.cap = cap
        super().__init__(f"Hilbert space dimension {dim} exceeds cap {cap}")


class ConvergenceError(SpinBosonError):
    """An iterative solver failed to reach its tolerance."""


class FitError(SpinBosonError):
    """A critical-exponent fit could not be performed on the given data."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
