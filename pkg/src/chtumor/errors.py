"""Exception types shared across the package."""
from __future__ import annotations


class ConfigurationError(ValueError):
    """Invalid parameter, grid, scheme or config-file input."""


class SolverError(RuntimeError):
    """A linear solve failed to reach the requested tolerance.

    Carries the relative residual at the final iterate and the iteration
    count so callers can report or retry.
    """

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (relative residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class DivergenceError(RuntimeError):
    """A time step produced non-finite values.

    The offending state (time plus raw arrays) is attached as a snapshot
    for post-mortem inspection.
    """

    def __init__(self, message: str, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot
