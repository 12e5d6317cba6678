"""Shared exception types."""


class CitemetricsError(Exception):
    """Base class for errors raised by this package."""


class IngestError(CitemetricsError):
    """Fatal problem while reading a source file in strict mode."""


class DataInconsistencyError(CitemetricsError):
    """Input data violates an invariant a metric depends on."""


class ConvergenceError(CitemetricsError):
    """An iterative solver did not reach the requested tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
