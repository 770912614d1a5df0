"""Exception hierarchy shared by all ghostfield modules."""


class GhostFieldError(Exception):
    """Base class for every error raised by this package."""


class DomainError(GhostFieldError, ValueError):
    """An argument lies outside the domain of the operation (k <= 0, R = 0, ...)."""


class TruncationError(GhostFieldError):
    """The truncated Fock space is too small for the requested amplitude.

    The residual that triggered the failure is kept on ``residual`` so callers
    can decide whether to retry with a larger ``n_max``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(GhostFieldError):
    """A quadrature or evolution did not reach the requested accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(GhostFieldError, ValueError):
    """Malformed or inconsistent run configuration."""


class MatrixOverflowError(GhostFieldError, OverflowError):
    """A matrix function produced non-finite entries."""
