"""Exception hierarchy shared by all csibeam modules."""


class CsibeamError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(CsibeamError, ValueError):
    """Invalid geometry, trajectory or experiment configuration."""


class DimensionError(CsibeamError, ValueError):
    """Vectors or matrices with incompatible shapes."""


class ConvergenceError(CsibeamError):
    """An iterative routine hit its iteration cap.

    The best residual reached before giving up is kept on ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverError(ConvergenceError):
    """The convex subproblem solver failed to certify its solution."""

    def __init__(self, message, residual=None, gap=None):
        super().__init__(message, residual)
        self.gap = gap


class EmptyNeighborhoodError(CsibeamError):
    """No database entry passed the closeness test."""
