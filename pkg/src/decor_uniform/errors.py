"""Exception hierarchy shared across the package."""


class DecorUniformError(Exception):
    """Base class for all package errors."""


# --- mesh connectivity ---

class MeshError(DecorUniformError):
    pass


class InvalidFaceError(MeshError):
    pass


class BoundaryEdgeError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


class NonOrientableError(MeshError):
    pass


class DisconnectedError(MeshError):
    pass


class FlipForbiddenError(MeshError):
    """Edge cannot be flipped: shared-vertex quad or the opposite diagonal already exists."""


# --- triangle geometry ---

class GeometryError(DecorUniformError):
    pass


class DegenerateTriangleError(GeometryError):
    pass


class ImaginaryRadicalCircleError(GeometryError):
    """Radical circle has non-positive squared radius; upstream separation invariant broken."""


class NonConvexQuadError(GeometryError):
    """Flip diagonal does not cross the open shared edge; flip would not embed."""


# --- decorated metrics ---

class MetricError(DecorUniformError):
    pass


class NonPositiveSquaredLengthError(MetricError):
    pass


class FactorOverflowError(MetricError):
    """Conformal factor entry exceeds the overflow guard."""


class TriangleInequalityError(MetricError):
    """A face violates the strict triangle inequality; the factor left the current cell."""

    def __init__(self, message, faces=None):
        super().__init__(message)
        self.faces = faces or []


class MetricValidityError(MetricError):
    """Metric fails validation; carries the offending report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# --- flips / state navigation ---

class DelaunayError(DecorUniformError):
    pass


class FlipLimitError(DelaunayError):
    """Flip iteration guard tripped; indicates numerical cycling."""


class StepUnderflowError(DelaunayError):
    """Adaptive substep shrank below the underflow threshold."""


class InvariantViolationError(DecorUniformError):
    """An internal invariant the theory guarantees was violated numerically."""


# --- solver ---

class SolverError(DecorUniformError):
    pass


class CaseUnsupportedError(SolverError):
    """Target curvature falls outside the supported sign cases."""


class MaxIterationsError(SolverError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# --- file formats ---

class FormatError(DecorUniformError):
    """Problem or result file failed to parse or violates the schema."""
