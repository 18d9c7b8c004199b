"""Exception types shared across the package."""


class StableHCError(Exception):
    """Base class for package errors."""


class DomainError(StableHCError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a pole.

    ``distance`` holds the distance to the nearest pole and ``pole`` its
    location.
    """

    def __init__(self, message, pole=None, distance=None):
        super().__init__(message)
        self.pole = pole
        self.distance = distance


class ConvergenceError(StableHCError, RuntimeError):
    """A numerical procedure failed to reach its tolerance.

    ``achieved`` carries the best error estimate that was reached.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(StableHCError, ValueError):
    """Invalid run configuration."""
