"""Shared exception types.

ResourceLimitError is the only class the CLI maps to a dedicated exit code
(3); everything else surfaces as an ordinary error.
"""


class DomainError(ValueError):
    """An argument violates a documented mathematical precondition."""


class InvalidWordError(DomainError):
    """A word digit is outside the system's alphabet."""


class LevelMismatchError(DomainError):
    """Lattice points from different refinement levels were mixed."""


class UnsupportedSystemError(DomainError):
    """The operation only supports the gasket preset's lattice arithmetic."""


class GeometryError(ValueError):
    """Degenerate or non-convex polygon input."""


class ResourceLimitError(RuntimeError):
    """A size guard (level or depth cap) was tripped."""


class EmptySearchError(RuntimeError):
    """A search produced no admissible candidate."""


class DegenerateMeasureError(DomainError):
    """A measure with zero total mass where positive mass is required."""


class ResolutionError(DomainError):
    """A zoom step exceeds the usable lattice resolution."""


class InvariantViolationError(RuntimeError):
    """Internal consistency check failed (indicates a bug upstream)."""
