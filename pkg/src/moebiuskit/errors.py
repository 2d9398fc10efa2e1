"""Exception hierarchy.

Every error carries a stable ``name`` so the scenario runner can report it as a
named per-check failure.
"""


class GeometryError(Exception):
    """Base class for all errors raised by the package."""

    @property
    def name(self) -> str:
        return type(self).__name__


# jets
class DivisionByZeroAtCenter(GeometryError, ZeroDivisionError):
    pass


class DomainError(GeometryError, ValueError):
    pass


class OrderExceeded(GeometryError, ValueError):
    pass


# lorentz
class DimMismatch(GeometryError, ValueError):
    pass


class ChartInvalid(GeometryError, ValueError):
    pass


# hypersurface
class JacobianRankDeficient(GeometryError):
    pass


class NoMultiplicityN2(GeometryError):
    pass


class AmbiguousClustering(GeometryError):
    pass


class InversionCenterOnImage(GeometryError):
    pass


class EigenvectorFieldNonSmooth(GeometryError):
    pass


# moebius
class UmbilicPoint(GeometryError):
    pass


# congruence
class MixedRank(GeometryError):
    pass


class RankNotTwo(GeometryError):
    pass


class SectionTangentToDelta(GeometryError):
    pass


class DegenerateInducedMetric(GeometryError):
    pass


# deform
class MetricMismatch(GeometryError):
    pass


class MetricNotConformal(GeometryError):
    pass


# gallery
class InvalidSpec(GeometryError, ValueError):
    pass


class ChartSingularity(GeometryError):
    pass


class FrameDegenerate(GeometryError):
    pass


# cli
class ConfigInvalid(GeometryError, ValueError):
    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
