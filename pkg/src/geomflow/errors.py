"""Exception hierarchy shared by all geomflow modules."""


class GeomflowError(Exception):
    """Base class for all geomflow errors."""


class ConfigError(GeomflowError):
    """Invalid run configuration (bad parameters, non-integral T/tau, ...)."""


class DegenerateEdge(GeomflowError):
    """A polygon edge is shorter than the degeneracy threshold."""


class SamplingFailure(GeomflowError):
    """The arclength table for a shape failed to converge."""


class SizeMismatch(GeomflowError):
    """Fields or curves have incompatible sizes."""


class SingularNormalMatrix(GeomflowError):
    """The normal-equation matrix of the curvature least-squares problem is
    numerically singular."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SingularSystem(GeomflowError):
    """A time-step linear system could not be solved to the residual contract."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class WellPosednessViolation(GeomflowError):
    """The current polygon violates the well-posedness assumptions."""

    def __init__(self, report):
        super().__init__(str(report))
        self.report = report


class ClippingFailure(GeomflowError):
    """Polygon boolean intersection failed on a degenerate configuration."""


class StepFailure(GeomflowError):
    """A time step failed; carries the step index and partial run data."""

    def __init__(self, step_index, cause, partial=None):
        super().__init__(f"step {step_index} failed: {cause}")
        self.step_index = step_index
        self.cause = cause
        self.partial = partial
