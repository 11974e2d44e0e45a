"""Exception types raised across the package.

Each class names one failure mode so callers (and the CLI exit-code map)
can react to it without parsing messages.
"""


class GeometryError(Exception):
    """Base class for every domain error in the package."""


class ModeMismatch(GeometryError):
    pass


class NotRealPoint(GeometryError):
    pass


class CommonComponent(GeometryError):
    pass


class DegenerateInput(GeometryError):
    pass


class DegenerateParams(GeometryError):
    pass


class ExactModeUnavailable(GeometryError):
    pass


class NoSpheres(GeometryError):
    """Raised by sphere operations on a surface whose real locus has no spheres."""


class IndeterminacyPoint(GeometryError):
    pass


class PoleChartDegenerate(GeometryError):
    pass


class NotOnSurface(GeometryError):
    pass


class AtCStarFixedPoint(GeometryError):
    pass


class JetFailure(GeometryError):
    pass


class UnsupportedSection(GeometryError):
    pass


class TableMismatch(GeometryError):
    pass


class SeedProjectionFailure(GeometryError):
    pass


class StepUnderflow(GeometryError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class AmbiguousTopology(GeometryError):
    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


class FiberBoundary(GeometryError):
    pass


class NotInW(GeometryError):
    pass


class ProjectionDegenerate(GeometryError):
    pass


class DeflationFailure(GeometryError):
    pass


class SignatureMismatch(GeometryError):
    pass


class GridTooCoarse(UserWarning):
    """Warning: two zeros of a periodic function fall inside one grid cell."""
