"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class StableMPError(Exception):
    """Base class for numerical failures raised by this package."""


class InvalidMeasureError(StableMPError, ValueError):
    pass


class InvalidDomainError(StableMPError, ValueError):
    pass


class RangeError(StableMPError, ValueError):
    pass


class RegularityError(StableMPError):
    """The function is not smooth enough for the requested evaluation."""


class ToleranceError(StableMPError):
    """A quadrature did not reach its tolerance; ``achieved`` holds the gap."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class TruncationError(ToleranceError):
    pass


class DivergentNormError(StableMPError):
    pass


class IntegrabilityError(StableMPError):
    pass


class AssemblyAccuracyError(StableMPError):
    pass


class SingularSystemError(StableMPError):
    pass


class InsufficientResolutionError(StableMPError):
    pass


class ConfigError(StableMPError, ValueError):
    """Invalid scenario configuration; ``pointer`` is a JSON pointer."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
