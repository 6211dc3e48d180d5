"""Exception taxonomy shared across the package."""


class SwarmSketchError(Exception):
    """Base class for all package errors."""


class InvalidInput(SwarmSketchError, ValueError):
    """An argument violates a documented precondition."""


class InvalidShape(InvalidInput):
    """A polygon is degenerate, self-intersecting or otherwise unusable."""


class ShapeTooThin(InvalidShape):
    """Grid refinement hit its cap before enough interior points existed."""


class NumericError(SwarmSketchError, RuntimeError):
    """A numerical routine failed (singular system, non-convergence)."""


class PlanningError(SwarmSketchError, RuntimeError):
    """The planner could not produce a usable plan."""
