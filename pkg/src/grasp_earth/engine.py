"""Change-detection math: Otsu thresholding, temporal median composites,
SAR difference classification, NDWI, pumice detection and zonal time series.

All SAR values are dB; the difference of two dates is a dB difference
(a log-ratio in linear power). Pixels invalid in either input are excluded
from masks and from every statistic.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import Catalog, DateWindow, Scene, Sensor, parse_timestamp
from .errors import (
    CalibrationInconsistent,
    DegenerateSamples,
    EmptyPolygonFootprint,
    GridMismatch,
    InvalidConfig,
    NoScenesInWindow,
)
from .raster import BoundingBox, GeoPolygon, GridSpec, Raster, rasterize_polygon, read_window

OTSU_BINS = 256

# per-date composite windows: optical uses +/- two weeks, SAR +/- 12 days
# (spans a Sentinel-1 revisit; SAR needs no cloud screening)
DEFAULT_WINDOW_DAYS = {Sensor.SAR: 12, Sensor.OPTICAL: 14}
COMPOSITE_BANDS = {Sensor.SAR: ("vv",), Sensor.OPTICAL: ("red", "green", "blue", "nir")}


# ---------------------------------------------------------------------------
# Otsu thresholding


def otsu_threshold(samples: Sequence[float] | np.ndarray) -> float:
    """Histogram threshold maximizing between-class variance.

    Builds 256 uniform bins over [min, max] and scans the 255 interior bin
    edges; the returned threshold is the upper edge of the argmax bin, with
    ties broken toward the smallest edge. Scores are compared in exact
    integer arithmetic so results are reproducible bit for bit.

    Raises DegenerateSamples on fewer than 2 samples or when all are equal.
    """
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size < 2:
        raise DegenerateSamples(f"need at least 2 samples, got {arr.size}")
    if not np.isfinite(arr).all():
        raise ValueError("samples must be finite")
    lo = float(arr.min())
    hi = float(arr.max())
    if not hi > lo:
        raise DegenerateSamples(f"all {arr.size} samples equal {lo}")

    scaled = (arr - lo) / (hi - lo) * OTSU_BINS
    idx = np.minimum(scaled.astype(np.int64), OTSU_BINS - 1)
    counts = np.bincount(idx, minlength=OTSU_BINS).tolist()
    total = int(arr.size)
    s_total = sum(i * c for i, c in enumerate(counts))

    best_k = 0
    best_num = -1
    best_den = 1
    n0 = 0
    s0 = 0
    for k in range(1, OTSU_BINS):
        n0 += counts[k - 1]
        s0 += (k - 1) * counts[k - 1]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        s1 = s_total - s0
        # omega0*omega1*(mu0 - mu1)^2 up to the constant 1/total^2
        num = (s0 * n1 - s1 * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_k, best_num, best_den = k, num, den
    return lo + (hi - lo) * best_k / OTSU_BINS


# ---------------------------------------------------------------------------
# Temporal composites


def temporal_composite(
    catalog: Catalog,
    sensor: Sensor | str,
    date: str | datetime,
    bbox: BoundingBox,
    window_days: int | None = None,
) -> Raster:
    """Per-pixel temporal median of all scenes around a date.

    Optical observations under cloud are dropped before the median; a pixel
    with no surviving observation is masked. An even observation count
    medians to the midpoint of the two middle values.
    """
    sensor = Sensor(sensor)
    days = DEFAULT_WINDOW_DAYS[sensor] if window_days is None else window_days
    window = DateWindow(parse_timestamp(date), days, days)
    scenes = catalog.query(sensor, window, bbox)
    if not scenes:
        raise NoScenesInWindow(
            f"no {sensor.value} scene within {window.start:%Y-%m-%d}..{window.end:%Y-%m-%d}"
        )
    windows = [read_window(catalog.load(sc), bbox) for sc in scenes]
    grid = windows[0].grid
    for w in windows[1:]:
        if w.grid != grid:
            raise GridMismatch("scenes in the window are not on a shared pixel grid")

    dropped = []
    for w in windows:
        drop = ~w.valid
        if sensor is Sensor.OPTICAL:
            drop = drop | (w.band("cloud") > 0.5)
        dropped.append(drop)
    dropped = np.stack(dropped)
    valid = (~dropped).any(axis=0)

    bands = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN pixels are masked anyway
        for name in COMPOSITE_BANDS[sensor]:
            stack = np.stack([w.band(name) for w in windows])
            stack = np.where(dropped, np.float32(np.nan), stack)
            med = np.nanmedian(stack, axis=0)
            bands[name] = np.where(valid, med, np.float32(0.0)).astype(np.float32)
    return Raster(grid, bands, valid)


# ---------------------------------------------------------------------------
# SAR change detection


@dataclass(frozen=True)
class CalibrationSet:
    """Lon/lat sample points over constructed and destructed areas."""

    constructed: tuple[tuple[float, float], ...]
    destructed: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class PumiceCalibration:
    pumice: tuple[tuple[float, float], ...]
    non_pumice: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class ThresholdPair:
    """dB thresholds for the increase (blue) and decrease (red) masks."""

    blue: float
    red: float

    def __post_init__(self):
        if not self.blue > self.red:
            raise CalibrationInconsistent(
                f"blue threshold {self.blue} must exceed red threshold {self.red}"
            )


@dataclass(frozen=True)
class ChangeLayer:
    blue_mask: np.ndarray
    red_mask: np.ndarray
    thresholds: ThresholdPair
    grid: GridSpec


def _snap_points(grid: GridSpec, coords) -> list[tuple[int, int]]:
    cells = []
    for lon, lat in coords:
        cell = grid.cell_of(lon, lat)
        if cell is not None:
            cells.append(cell)
    return cells


def _sample_plane(
    plane: np.ndarray, valid: np.ndarray, grid: GridSpec, coords, label: str
) -> np.ndarray:
    values = [
        plane[r, c] for r, c in _snap_points(grid, coords) if valid[r, c]
    ]
    if len(values) < 2:
        raise DegenerateSamples(
            f"{label}: calibration resolves to {len(values)} valid pixels, need >= 2"
        )
    return np.asarray(values, dtype=np.float64)


def _class_threshold(samples: np.ndarray, fallback_offset: float, label: str) -> float:
    if samples.max() > samples.min():
        return otsu_threshold(samples)
    # A class whose differences are all identical (e.g. identical dates)
    # carries no contrast for Otsu; fall back to a threshold 1 dB beyond the
    # constant so the class mask stays empty over an unchanged scene.
    return float(samples[0]) + fallback_offset


def derive_thresholds(
    constructed_diffs: np.ndarray | Sequence[float],
    destructed_diffs: np.ndarray | Sequence[float],
) -> ThresholdPair:
    """Otsu thresholds from dB differences sampled over the two classes."""
    blue = _class_threshold(np.asarray(constructed_diffs, np.float64), +1.0, "constructed")
    red = _class_threshold(np.asarray(destructed_diffs, np.float64), -1.0, "destructed")
    return ThresholdPair(blue, red)


def classify_difference(
    diff: np.ndarray, valid: np.ndarray, thresholds: ThresholdPair, grid: GridSpec
) -> ChangeLayer:
    """Blue where the difference rose past the blue threshold, red where it
    fell past the red one; masked pixels belong to neither."""
    blue = (diff >= thresholds.blue) & valid
    red = (diff <= thresholds.red) & valid
    return ChangeLayer(blue, red, thresholds, grid)


def sar_change(
    catalog: Catalog,
    date1: str | datetime,
    date2: str | datetime,
    calib: CalibrationSet,
    bbox: BoundingBox,
    window_days: int = DEFAULT_WINDOW_DAYS[Sensor.SAR],
) -> ChangeLayer:
    """Blue/red change masks between two dates' SAR composites.

    The difference image date2 - date1 is thresholded with Otsu values
    derived from the user-sampled constructed/destructed areas; blue marks
    backscatter increase (new artifacts), red marks decrease.
    """
    c1 = temporal_composite(catalog, Sensor.SAR, date1, bbox, window_days)
    c2 = temporal_composite(catalog, Sensor.SAR, date2, bbox, window_days)
    if c1.grid != c2.grid:
        raise GridMismatch("date composites are not on a shared pixel grid")
    valid = c1.valid & c2.valid
    diff = c2.band("vv").astype(np.float64) - c1.band("vv").astype(np.float64)
    samples_c = _sample_plane(diff, valid, c1.grid, calib.constructed, "constructed")
    samples_d = _sample_plane(diff, valid, c1.grid, calib.destructed, "destructed")
    thresholds = derive_thresholds(samples_c, samples_d)
    return classify_difference(diff, valid, thresholds, c1.grid)


# ---------------------------------------------------------------------------
# NDWI and pumice detection


def ndwi(raster: Raster, green: str = "green", nir: str = "nir") -> Raster:
    """(green - nir) / (green + nir) with zero-sum pixels masked."""
    g = raster.band(green)
    n = raster.band(nir)
    total = g + n
    valid = raster.valid & (total != 0)
    values = np.zeros_like(total)
    np.divide(g - n, total, out=values, where=valid)
    return Raster(raster.grid, {"ndwi": values}, valid)


@dataclass(frozen=True)
class PumiceResult:
    mask: np.ndarray
    threshold: float
    grid: GridSpec
    scene_id: str


def nearest_scene(
    catalog: Catalog, sensor: Sensor, date: str | datetime, bbox: BoundingBox
) -> Scene:
    """Scene of a sensor closest in time to a date (earlier wins ties)."""
    target = parse_timestamp(date)
    candidates = [
        sc for sc in catalog.scenes if sc.sensor is sensor and sc.bbox.intersects(bbox)
    ]
    if not candidates:
        raise NoScenesInWindow(f"no {sensor.value} scene intersects {bbox}")
    return min(candidates, key=lambda sc: (abs(sc.timestamp - target), sc.timestamp))


def detect_pumice(
    catalog: Catalog,
    date: str | datetime,
    calib: PumiceCalibration,
    bbox: BoundingBox,
) -> PumiceResult:
    """Floating-pumice mask from the single scene nearest the date.

    No temporal compositing here: detection should reflect the raft's exact
    position on the requested date. NDWI is thresholded with Otsu over the
    pooled pumice and non-pumice calibration values (cloud-masked first),
    and detections are suppressed under cloud and on land.
    """
    scene = nearest_scene(catalog, Sensor.OPTICAL, date, bbox)
    window = read_window(catalog.load(scene), bbox)
    index = ndwi(window)
    values = index.band("ndwi")
    cloud = window.band("cloud") > 0.5
    land = catalog.land_mask_on(window.grid)
    usable = index.valid & ~cloud
    pooled = np.concatenate(
        [
            _sample_plane(values, usable, window.grid, calib.pumice, "pumice"),
            _sample_plane(values, usable, window.grid, calib.non_pumice, "non_pumice"),
        ]
    )
    threshold = otsu_threshold(pooled)
    mask = (values < threshold) & index.valid & ~cloud & ~land
    return PumiceResult(mask, float(threshold), window.grid, scene.id)


# ---------------------------------------------------------------------------
# Zonal time series


@dataclass(frozen=True)
class TimeSample:
    timestamp: datetime
    mean: float | None
    count: int


def zonal_timeseries(
    catalog: Catalog,
    poly: GeoPolygon,
    sensor: Sensor | str = Sensor.SAR,
    band: str = "vv",
    date_range: tuple[str | datetime, str | datetime] | None = None,
) -> list[TimeSample]:
    """Per-scene mean of a band over the polygon's pixel footprint.

    Means are exact arithmetic means (fsum) over the pixels selected by
    rasterize_polygon, one sample per scene ascending by timestamp. Scenes
    where the footprint exists but every pixel is masked are emitted with
    count 0 and no mean.
    """
    sensor = Sensor(sensor)
    bbox = poly.bounds
    if date_range is not None:
        start, end = parse_timestamp(date_range[0]), parse_timestamp(date_range[1])
    else:
        full = catalog.date_range(sensor)
        if full is None:
            raise EmptyPolygonFootprint(f"catalog has no {sensor.value} scenes")
        start, end = full
    scenes = [
        sc
        for sc in catalog.scenes
        if sc.sensor is sensor and start <= sc.timestamp <= end and sc.bbox.intersects(bbox)
    ]
    footprints: dict[GridSpec, np.ndarray] = {}
    samples: list[TimeSample] = []
    covered = False
    for sc in scenes:
        raster = catalog.load(sc)
        fp = footprints.get(raster.grid)
        if fp is None:
            fp = rasterize_polygon(poly, raster.grid)
            footprints[raster.grid] = fp
        if not fp.any():
            continue
        covered = True
        sel = fp & raster.valid
        count = int(sel.sum())
        if count == 0:
            samples.append(TimeSample(sc.timestamp, None, 0))
        else:
            mean = math.fsum(raster.band(band)[sel].tolist()) / count
            samples.append(TimeSample(sc.timestamp, mean, count))
    if not covered:
        raise EmptyPolygonFootprint("polygon covers no pixel on any scene in range")
    return samples


# ---------------------------------------------------------------------------
# Calibration and polygon files (JSON, lon/lat arrays per class)


def _coord_list(obj: dict, field: str) -> tuple[tuple[float, float], ...]:
    try:
        pts = obj[field]
    except KeyError:
        raise InvalidConfig(field, "missing coordinate array") from None
    try:
        return tuple((float(lon), float(lat)) for lon, lat in pts)
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(field, f"expected [[lon, lat], ...]: {exc}") from None


def load_sar_calibration(path: str | Path) -> CalibrationSet:
    obj = json.loads(Path(path).read_text())
    return CalibrationSet(_coord_list(obj, "constructed"), _coord_list(obj, "destructed"))


def load_pumice_calibration(path: str | Path) -> PumiceCalibration:
    obj = json.loads(Path(path).read_text())
    return PumiceCalibration(_coord_list(obj, "pumice"), _coord_list(obj, "non_pumice"))


def load_polygon(path: str | Path) -> GeoPolygon:
    """Polygon file: {"exterior": [[lon, lat], ...], "interiors": [...]}
    or a bare coordinate ring."""
    obj = json.loads(Path(path).read_text())
    if isinstance(obj, list):
        return GeoPolygon(obj)
    exterior = _coord_list(obj, "exterior")
    interiors = [
        tuple((float(lon), float(lat)) for lon, lat in ring)
        for ring in obj.get("interiors", [])
    ]
    return GeoPolygon(exterior, interiors)
