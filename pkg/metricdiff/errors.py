"""Exceptions raised by metricdiff. The CLI maps ConfigError to exit code 1
   and NumericalFailure (and IO errors) to exit code 2.
"""


class MetricDiffError(Exception):
    """Base class for all package errors"""


class ConfigError(MetricDiffError, ValueError):
    """Invalid parameters or run configuration"""


class NumericalFailure(MetricDiffError):
    """A computation could not produce a meaningful value"""


class AboveRoot(MetricDiffError):
    """Requested ancestor lies above the root of the grid"""


class TooLarge(MetricDiffError):
    """Cube too large for the shifted-grid covering"""


class BackendMismatch(MetricDiffError, TypeError):
    """Point payload does not belong to the metric backend"""


class InvalidMetric(MetricDiffError, ValueError):
    """Distance matrix fails the metric axioms"""
    def __init__(self, message, triple=None):
        super().__init__(message)
        self.triple = triple


class OutOfDomain(MetricDiffError, ValueError):
    """Point outside the domain on which the map is known"""


class ResolutionTooCoarse(MetricDiffError, ValueError):
    """Sampling grid too coarse for the analyzed cubes"""


class DegenerateSegment(NumericalFailure):
    """Segment of zero length"""


class InsufficientCoverage(NumericalFailure):
    """No sampled line met the dilated cube in a long enough chord"""


class ShortChord(NumericalFailure):
    """Line meets 3Q^N in a chord shorter than alpha side(Q)"""


class PointsTooClose(NumericalFailure):
    """Pair separation below alpha side(Q)"""


class InsufficientPairs(NumericalFailure):
    """Too few pairs for the requested number of functionals"""


class EmptyBodyWarning(UserWarning):
    """Every star profile radius is infinite; the gauge is identically zero"""
