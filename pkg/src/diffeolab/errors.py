"""Exception types shared across the lab."""


class LabError(Exception):
    """Base class for all lab errors."""


class DomainError(LabError, ValueError):
    """An argument lies outside its admissible domain."""


class ConstructionError(LabError, ValueError):
    """A generator or generator pair cannot be built from the given data."""

    def __init__(self, message, feasible_k=None):
        super().__init__(message)
        self.feasible_k = feasible_k


class PreconditionError(LabError, ValueError):
    """An operation precondition does not hold."""


class NumericError(LabError, ArithmeticError):
    """An iterative numeric routine failed to converge."""


class CapExhausted(LabError):
    """A search hit its node, level or size cap.

    ``best`` carries the best partial payload so callers can still report it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(LabError, ValueError):
    """Bad experiment configuration."""
