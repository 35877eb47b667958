"""Exception types shared across the package."""


class AggKdeError(Exception):
    """Base class for all package errors."""


class MalformedInput(AggKdeError):
    """An input file (GeoJSON, CSV, ASCII grid, JSON config) could not be parsed."""


class EmptyAreaAtResolution(AggKdeError):
    """An area captures no grid centroid at the requested cell size."""

    def __init__(self, area_id):
        self.area_id = area_id
        super().__init__(f"area {area_id!r} contains no grid centroid; grid too coarse")


class DegenerateSample(AggKdeError):
    """Fewer than two points, or zero variance in a coordinate."""


class AllZeroWeights(AggKdeError):
    """A sampling weight vector sums to zero."""


class DegenerateCorrelation(AggKdeError):
    """Correlation undefined: fewer than three areas or zero variance."""


class ConstantField(AggKdeError):
    """Inversion of a constant density field is undefined."""


class GridMismatch(AggKdeError):
    """Two fields or rasters do not share the same lattice/mask."""


class TooFewGridPoints(AggKdeError):
    """Grid has fewer in-mask points than requested mixture components."""


class CoverageWarning(UserWarning):
    """Part of the evaluation grid is not covered by a raster or weight source."""
