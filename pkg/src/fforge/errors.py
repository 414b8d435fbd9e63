"""Exception hierarchy shared across the package.

Configuration problems and numerical failures are kept apart so the CLI can
map them to distinct exit codes.
"""

from __future__ import annotations


class FForgeError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FForgeError):
    """Invalid user configuration: unknown names, bad shapes of a request."""


class ShapeError(FForgeError):
    """Array arguments with incompatible shapes."""


class NumericalError(FForgeError):
    """A computation produced a non-finite or undefined value.

    ``index`` locates the first offending coordinate when known.
    """

    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class NotSPD(FForgeError):
    """A matrix required to be symmetric positive definite is not.

    Carries the failing Cholesky pivot (``pivot_index``, ``pivot_value``) and,
    for batched input, the index of the offending matrix.
    """

    def __init__(self, message: str, pivot_index=None, pivot_value=None, batch_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        self.batch_index = batch_index


class DomainError(FForgeError):
    """A chart point left the valid domain. ``index`` is the grid location."""

    def __init__(self, message: str, index=None):
        super().__init__(message)
        self.index = index


class IllPosedRanders(FForgeError):
    """Wind speed reaches or exceeds the allowed top speed ``v0``."""

    def __init__(self, wind_norm: float, v0: float):
        super().__init__(
            f"Randers metric ill-posed: wind norm {wind_norm:.6g} >= v0 {v0:.6g}"
        )
        self.wind_norm = wind_norm
        self.v0 = v0


class StalledLineSearch(FForgeError):
    """Backtracking exhausted its halving budget without sufficient decrease."""

    def __init__(self, message: str, halvings: int = 0):
        super().__init__(message)
        self.halvings = halvings


class IntegrationError(FForgeError):
    """ODE integration failed or the trajectory left the chart domain."""

    def __init__(self, message: str, exit_time=None):
        super().__init__(message)
        self.exit_time = exit_time


class Diverged(FForgeError):
    """A first-order optimizer blew up. ``snapshot`` is the last iterate."""

    def __init__(self, message: str, snapshot=None, iteration=None):
        super().__init__(message)
        self.snapshot = snapshot
        self.iteration = iteration
