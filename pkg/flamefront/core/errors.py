"""
Exception types for the flame front laboratory.
"""


class FlameFrontError(Exception):
    """Base class for every error raised by the laboratory."""


class ParameterError(FlameFrontError):
    """A numeric parameter is outside its admissible range."""


class ConfigurationError(FlameFrontError):
    """A run configuration is inconsistent (unknown keys, CFL violation, ...)."""

    def __init__(self, message: str, key: str = None):
        super().__init__(message)
        self.key = key


class DomainError(FlameFrontError):
    """A point or time lies outside the domain an operation is defined on."""


class SpecificationError(FlameFrontError):
    """Initial data or a grid does not satisfy its structural invariants."""


class PreconditionError(FlameFrontError):
    """Inputs violate a documented precondition (e.g. unordered pair)."""


class ProfileNotFoundError(FlameFrontError):
    """The profile shooting found no sign change before the search cap."""


class EstimationError(FlameFrontError):
    """An extinction estimate was requested from a run that never extinguished."""


class InsufficientResolutionError(FlameFrontError):
    """Too few resolved levels or cells for a meaningful measurement."""


class FixtureIntegrityError(FlameFrontError):
    """Regression fixtures are missing fields or fail their digest check."""
