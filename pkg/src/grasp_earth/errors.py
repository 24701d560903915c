"""Domain error hierarchy shared by the engine, catalog, service and CLI.

Every error carries a stable ``code`` (the class name) so the CLI can emit
``ERROR <code>: <message>`` lines and the HTTP service can map errors to
status codes without string matching.
"""

from __future__ import annotations


class GraspError(Exception):
    """Base class for all domain errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class OutOfRange(GraspError):
    """Coordinate or zoom outside the supported range."""


class UnsupportedExtent(GraspError):
    """Grid or polygon crosses the antimeridian or leaves the Mercator strip."""


class DegeneratePolygon(GraspError):
    """Polygon ring with fewer than 3 vertices."""


class EmptyIntersection(GraspError):
    """Requested window or tile does not intersect the raster extent."""


class GridMismatch(GraspError):
    """Rasters that must share a pixel grid do not."""


class IoFailure(GraspError):
    """Filesystem read or write failed."""


class FormatViolation(GraspError):
    """Container bytes violate the GRSP format.

    ``offset`` is the byte position at which the violation was detected.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class MissingBand(GraspError):
    """A band role required by the sensor (or a static layer) is absent."""

    def __init__(self, band: str):
        super().__init__(f"missing band: {band}")
        self.band = band


class DuplicateId(GraspError):
    """A different scene is already registered under the same id."""


class NoScenesInWindow(GraspError):
    """No catalog scene matches the sensor, window and bounding box."""


class DegenerateSamples(GraspError):
    """Too few samples, or all samples equal, so Otsu cannot split them."""


class CalibrationInconsistent(GraspError):
    """Derived blue threshold does not exceed the red threshold."""


class EmptyPolygonFootprint(GraspError):
    """Polygon rasterizes to zero pixels on every scene in range."""


class InvalidConfig(GraspError):
    """Synthetic-scene or calibration configuration is malformed."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ShapeMismatch(GraspError):
    """Mask planes being compared have different dimensions."""
