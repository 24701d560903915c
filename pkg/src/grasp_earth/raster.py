"""Grids, rasters and the geometry plumbing under the change engine.

Pixel data lives on plain geographic lat/lon grids (degrees); Web-Mercator
shows up only in the tile math. All point-in-cell decisions use pixel
centers, polygon fill uses the even-odd rule, and nodata is carried in a
separate validity plane rather than a sentinel value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegeneratePolygon,
    EmptyIntersection,
    GridMismatch,
    OutOfRange,
    UnsupportedExtent,
)

# Top of the Web-Mercator strip; defined via the inverse mapping so that
# tile_bounds(0,0,0) reproduces it bit-for-bit.
MAX_LAT = math.degrees(math.atan(math.sinh(math.pi)))
MAX_ZOOM = 22
TILE_SIZE = 256


@dataclass(frozen=True)
class BoundingBox:
    """Geographic extent in degrees, west < east and south < north."""

    west: float
    south: float
    east: float
    north: float

    def __post_init__(self):
        if not (self.west < self.east):
            raise ValueError(f"west ({self.west}) must be < east ({self.east})")
        if not (self.south < self.north):
            raise ValueError(f"south ({self.south}) must be < north ({self.north})")

    def intersects(self, other: "BoundingBox") -> bool:
        return (
            self.west < other.east
            and self.east > other.west
            and self.south < other.north
            and self.north > other.south
        )

    def union(self, other: "BoundingBox") -> "BoundingBox":
        return BoundingBox(
            min(self.west, other.west),
            min(self.south, other.south),
            max(self.east, other.east),
            max(self.north, other.north),
        )


@dataclass(frozen=True)
class GridSpec:
    """Uniform lat/lon pixel grid anchored at its top-left corner.

    ``origin_lon``/``origin_lat`` locate the outer corner of pixel (0, 0);
    pixel (row, col) has its center at
    ``(origin_lon + (col + 0.5) * pixel_size, origin_lat - (row + 0.5) * pixel_size)``.
    """

    origin_lon: float
    origin_lat: float
    pixel_size: float
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("grid must be at least 1x1")
        if not self.pixel_size > 0:
            raise ValueError("pixel_size must be positive")
        east = self.origin_lon + self.width * self.pixel_size
        if self.origin_lon < -180.0 or east > 180.0:
            raise UnsupportedExtent(
                f"grid longitude span [{self.origin_lon}, {east}] leaves [-180, 180]"
            )
        top_center = self.origin_lat - 0.5 * self.pixel_size
        bottom_center = self.origin_lat - (self.height - 0.5) * self.pixel_size
        if abs(top_center) >= MAX_LAT or abs(bottom_center) >= MAX_LAT:
            raise UnsupportedExtent(
                "grid rows leave the Web-Mercator strip "
                f"(row centers {bottom_center}..{top_center}, limit ±{MAX_LAT})"
            )

    @property
    def extent(self) -> BoundingBox:
        return BoundingBox(
            self.origin_lon,
            self.origin_lat - self.height * self.pixel_size,
            self.origin_lon + self.width * self.pixel_size,
            self.origin_lat,
        )

    def lon_centers(self) -> np.ndarray:
        cols = np.arange(self.width, dtype=np.float64)
        return self.origin_lon + (cols + 0.5) * self.pixel_size

    def lat_centers(self) -> np.ndarray:
        rows = np.arange(self.height, dtype=np.float64)
        return self.origin_lat - (rows + 0.5) * self.pixel_size

    def cell_of(self, lon: float, lat: float) -> tuple[int, int] | None:
        """Row/col of the cell containing a point, or None when outside."""
        col = math.floor((lon - self.origin_lon) / self.pixel_size)
        row = math.floor((self.origin_lat - lat) / self.pixel_size)
        if 0 <= col < self.width and 0 <= row < self.height:
            return row, col
        return None


@dataclass(frozen=True)
class TileKey:
    """Slippy-map tile address (z, x, y)."""

    z: int
    x: int
    y: int

    def __post_init__(self):
        if not (0 <= self.z <= MAX_ZOOM):
            raise OutOfRange(f"zoom {self.z} outside [0, {MAX_ZOOM}]")
        n = 1 << self.z
        if not (0 <= self.x < n and 0 <= self.y < n):
            raise OutOfRange(f"tile ({self.x}, {self.y}) outside [0, {n}) at z={self.z}")


class GeoPolygon:
    """Polygon in lon/lat with an exterior ring and optional holes.

    Rings are implicitly closed and need not be simple; containment is the
    even-odd rule, so self-intersections and holes come out consistently.
    """

    def __init__(
        self,
        exterior: Sequence[tuple[float, float]],
        interiors: Iterable[Sequence[tuple[float, float]]] = (),
    ):
        self.exterior = tuple((float(x), float(y)) for x, y in exterior)
        self.interiors = tuple(
            tuple((float(x), float(y)) for x, y in ring) for ring in interiors
        )
        for ring in (self.exterior, *self.interiors):
            if len(ring) < 3:
                raise DegeneratePolygon(f"ring has {len(ring)} vertices, need >= 3")
            for lon, lat in ring:
                if lon < -180.0 or lon > 180.0:
                    raise UnsupportedExtent(f"vertex longitude {lon} outside [-180, 180]")
                if abs(lat) > 90.0:
                    raise OutOfRange(f"vertex latitude {lat} outside [-90, 90]")

    def rings(self) -> tuple[tuple[tuple[float, float], ...], ...]:
        return (self.exterior, *self.interiors)

    @property
    def bounds(self) -> BoundingBox:
        lons = [p[0] for ring in self.rings() for p in ring]
        lats = [p[1] for ring in self.rings() for p in ring]
        west, east = min(lons), max(lons)
        south, north = min(lats), max(lats)
        if west == east or south == north:
            # zero-area hull still needs a valid box for queries
            pad = 1e-9
            return BoundingBox(west - pad, south - pad, east + pad, north + pad)
        return BoundingBox(west, south, east, north)


class Raster:
    """Georeferenced stack of named float32 bands plus a validity plane.

    Bands keep insertion order. Arrays are marked read-only; rasters are
    safe to share across threads.
    """

    def __init__(
        self,
        grid: GridSpec,
        bands: Mapping[str, np.ndarray],
        valid: np.ndarray | None = None,
    ):
        self.grid = grid
        shape = (grid.height, grid.width)
        converted: dict[str, np.ndarray] = {}
        for name, data in bands.items():
            if name in converted:
                raise ValueError(f"duplicate band name {name!r}")
            arr = np.ascontiguousarray(data, dtype=np.float32)
            if arr.shape != shape:
                raise GridMismatch(
                    f"band {name!r} has shape {arr.shape}, grid is {shape}"
                )
            arr.flags.writeable = False
            converted[name] = arr
        if not converted:
            raise ValueError("raster needs at least one band")
        if valid is None:
            valid = np.ones(shape, dtype=bool)
        else:
            valid = np.ascontiguousarray(valid, dtype=bool)
            if valid.shape != shape:
                raise GridMismatch(f"valid plane has shape {valid.shape}, grid is {shape}")
        valid.flags.writeable = False
        self.bands = converted
        self.valid = valid

    def band(self, name: str) -> np.ndarray:
        return self.bands[name]

    @property
    def band_names(self) -> tuple[str, ...]:
        return tuple(self.bands)

    def with_bands(self, bands: Mapping[str, np.ndarray]) -> "Raster":
        """Same grid and mask, different band payload."""
        return Raster(self.grid, bands, self.valid)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        if self.grid != other.grid or self.band_names != other.band_names:
            return False
        if self.valid.tobytes() != other.valid.tobytes():
            return False
        return all(
            self.bands[n].tobytes() == other.bands[n].tobytes() for n in self.bands
        )

    def __repr__(self) -> str:
        return (
            f"Raster({self.grid.width}x{self.grid.height}, "
            f"bands={list(self.bands)}, valid={int(self.valid.sum())})"
        )


# ---------------------------------------------------------------------------
# Web-Mercator tile math


def _merc_lat(y_norm: float) -> float:
    """Latitude of a normalized Mercator y in [0, 1] (0 = north edge)."""
    return math.degrees(math.atan(math.sinh(math.pi * (1.0 - 2.0 * y_norm))))


def lonlat_to_tile(lon: float, lat: float, z: int) -> TileKey:
    """Tile containing a point at zoom z (standard XYZ scheme)."""
    if not (0 <= z <= MAX_ZOOM):
        raise OutOfRange(f"zoom {z} outside [0, {MAX_ZOOM}]")
    if not (-180.0 <= lon < 180.0):
        raise OutOfRange(f"longitude {lon} outside [-180, 180)")
    if not abs(lat) < MAX_LAT:
        raise OutOfRange(f"latitude {lat} outside (-{MAX_LAT}, {MAX_LAT})")
    n = 1 << z
    x = math.floor((lon + 180.0) / 360.0 * n)
    phi = math.radians(lat)
    y = math.floor((1.0 - math.log(math.tan(phi) + 1.0 / math.cos(phi)) / math.pi) / 2.0 * n)
    x = min(max(x, 0), n - 1)
    y = min(max(y, 0), n - 1)
    return TileKey(z, x, y)


def tile_bounds(key: TileKey) -> BoundingBox:
    """Geographic extent of a tile; tiles at one zoom partition the strip."""
    n = 1 << key.z
    west = key.x / n * 360.0 - 180.0
    east = (key.x + 1) / n * 360.0 - 180.0
    north = _merc_lat(key.y / n)
    south = _merc_lat((key.y + 1) / n)
    return BoundingBox(west, south, east, north)


# ---------------------------------------------------------------------------
# Polygon rasterization (even-odd scanline on pixel centers)


def _row_crossings(rings, lat: float) -> np.ndarray:
    """X coordinates where ring edges cross the horizontal line at lat."""
    xs = []
    for ring in rings:
        m = len(ring)
        for i in range(m):
            x1, y1 = ring[i]
            x2, y2 = ring[(i + 1) % m]
            if (y1 > lat) != (y2 > lat):
                xs.append((x2 - x1) * (lat - y1) / (y2 - y1) + x1)
    return np.sort(np.asarray(xs, dtype=np.float64))


def rasterize_polygon(poly: GeoPolygon, grid: GridSpec) -> np.ndarray:
    """Boolean plane: True where the pixel center is inside under even-odd.

    A center is inside when an odd number of edge crossings lie strictly to
    its right, matching the classic ray-cast point-in-polygon test.
    """
    rings = poly.rings()
    out = np.zeros((grid.height, grid.width), dtype=bool)
    lons = grid.lon_centers()
    lats = grid.lat_centers()
    for row, lat in enumerate(lats):
        crossings = _row_crossings(rings, float(lat))
        if crossings.size == 0:
            continue
        n_le = np.searchsorted(crossings, lons, side="right")
        out[row] = (crossings.size - n_le) % 2 == 1
    return out


# ---------------------------------------------------------------------------
# Windows and resampling


def read_window(raster: Raster, bbox: BoundingBox) -> Raster:
    """Sub-raster of pixels whose centers fall inside bbox (inclusive edges).

    Values are copied verbatim; the output grid stays aligned with the input.
    """
    grid = raster.grid
    ps = grid.pixel_size
    first_col = max(0, math.ceil((bbox.west - grid.origin_lon) / ps - 0.5))
    last_col = min(grid.width - 1, math.floor((bbox.east - grid.origin_lon) / ps - 0.5))
    first_row = max(0, math.ceil((grid.origin_lat - bbox.north) / ps - 0.5))
    last_row = min(grid.height - 1, math.floor((grid.origin_lat - bbox.south) / ps - 0.5))
    if first_col > last_col or first_row > last_row:
        raise EmptyIntersection(f"bbox {bbox} covers no pixel centers of {grid}")
    sub = GridSpec(
        grid.origin_lon + first_col * ps,
        grid.origin_lat - first_row * ps,
        ps,
        last_col - first_col + 1,
        last_row - first_row + 1,
    )
    rows = slice(first_row, last_row + 1)
    cols = slice(first_col, last_col + 1)
    bands = {name: arr[rows, cols] for name, arr in raster.bands.items()}
    return Raster(sub, bands, raster.valid[rows, cols])


def _lookup_indices(
    grid: GridSpec, lons: np.ndarray, lats: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source (row, col) per target center plus an in-extent mask.

    lons has one entry per output column, lats one per output row; the
    result arrays are broadcast to the full (len(lats), len(lons)) shape.
    """
    cols = np.floor((lons - grid.origin_lon) / grid.pixel_size).astype(np.int64)
    rows = np.floor((grid.origin_lat - lats) / grid.pixel_size).astype(np.int64)
    inside = ((cols >= 0) & (cols < grid.width))[np.newaxis, :] & (
        (rows >= 0) & (rows < grid.height)
    )[:, np.newaxis]
    cols = np.clip(cols, 0, grid.width - 1)
    rows = np.clip(rows, 0, grid.height - 1)
    rr, cc = np.broadcast_arrays(rows[:, np.newaxis], cols[np.newaxis, :])
    return rr, cc, inside


def resample_to_tile(raster: Raster, key: TileKey, size: int = TILE_SIZE) -> Raster:
    """Nearest-neighbor resampling of a raster into one Mercator tile.

    Output pixel centers follow the tile's Mercator grid (rows are spaced in
    Mercator y, not uniformly in latitude); every output value is copied from
    the source pixel containing the center, and centers outside the source
    extent or on masked pixels come out masked. The returned GridSpec records
    the tile's bounds with a nominal uniform row spacing.

    Raises EmptyIntersection when the tile misses the raster entirely.
    """
    bounds = tile_bounds(key)
    if not bounds.intersects(raster.grid.extent):
        raise EmptyIntersection(f"tile {key} does not intersect {raster.grid.extent}")
    n = 1 << key.z
    px = np.arange(size, dtype=np.float64)
    lons = bounds.west + (px + 0.5) * (bounds.east - bounds.west) / size
    y_norm = (key.y + (px + 0.5) / size) / n
    lats = np.degrees(np.arctan(np.sinh(np.pi * (1.0 - 2.0 * y_norm))))
    rr, cc, inside = _lookup_indices(raster.grid, lons, lats)
    out_grid = GridSpec(
        bounds.west, bounds.north, (bounds.north - bounds.south) / size, size, size
    )
    bands = {name: arr[rr, cc] for name, arr in raster.bands.items()}
    valid = raster.valid[rr, cc] & inside
    return Raster(out_grid, bands, valid)


def resample_to_grid(raster: Raster, grid: GridSpec) -> Raster:
    """Nearest-neighbor resampling onto another lat/lon grid."""
    rr, cc, inside = _lookup_indices(raster.grid, grid.lon_centers(), grid.lat_centers())
    bands = {name: arr[rr, cc] for name, arr in raster.bands.items()}
    valid = raster.valid[rr, cc] & inside
    return Raster(grid, bands, valid)
