"""Deterministic synthetic scene generator with ground-truth manifests.

Models the phenomenology the detector cares about: built-up artifacts raise
SAR backscatter, water lowers it, pumice rafts depress NDWI against open
sea, clouds hide optical pixels. Speckle is additive Gaussian in dB
(multiplicative in linear power). The pseudo-random source is NumPy's
default_rng (PCG64), so one (config, seed) always regenerates a
byte-identical catalog.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from . import catalog as cat
from .catalog import Sensor, format_timestamp, parse_timestamp
from .container import write_container
from .errors import InvalidConfig, ShapeMismatch
from .raster import BoundingBox, GeoPolygon, GridSpec, Raster, rasterize_polygon

EVENT_KINDS = ("construct", "destruct", "pumice_raft")


@dataclass(frozen=True)
class ReflectanceProfile:
    red: float
    green: float
    blue: float
    nir: float

    def as_dict(self) -> dict[str, float]:
        return {"red": self.red, "green": self.green, "blue": self.blue, "nir": self.nir}


@dataclass(frozen=True)
class SynthEvent:
    kind: str
    bbox: BoundingBox
    start: datetime
    magnitude_db: float | None = None


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    grid: GridSpec
    start: datetime
    cadence_days: int
    count: int
    sensors: tuple[Sensor, ...] = (Sensor.SAR, Sensor.OPTICAL)
    sar_background_db: float = -12.0
    speckle_sigma_db: float = 1.0
    sea: ReflectanceProfile = ReflectanceProfile(0.03, 0.05, 0.06, 0.01)
    land: ReflectanceProfile = ReflectanceProfile(0.12, 0.10, 0.08, 0.30)
    pumice: ReflectanceProfile = ReflectanceProfile(0.16, 0.15, 0.13, 0.22)
    cloud: ReflectanceProfile = ReflectanceProfile(0.80, 0.80, 0.80, 0.75)
    cloud_fraction: float = 0.0
    land_bbox: BoundingBox | None = None
    events: tuple[SynthEvent, ...] = ()

    def __post_init__(self):
        if self.cadence_days < 1:
            raise InvalidConfig("cadence_days", f"must be >= 1, got {self.cadence_days}")
        if self.count < 1:
            raise InvalidConfig("count", f"must be >= 1, got {self.count}")
        if not (0.0 <= self.cloud_fraction < 1.0):
            raise InvalidConfig("cloud_fraction", f"must be in [0, 1), got {self.cloud_fraction}")
        extent = self.grid.extent
        for i, ev in enumerate(self.events):
            if ev.kind not in EVENT_KINDS:
                raise InvalidConfig(f"events[{i}].kind", f"unknown kind {ev.kind!r}")
            if ev.kind in ("construct", "destruct") and ev.magnitude_db is None:
                raise InvalidConfig(f"events[{i}].magnitude_db", "required for SAR events")
            b = ev.bbox
            if not (
                extent.west <= b.west
                and b.east <= extent.east
                and extent.south <= b.south
                and b.north <= extent.north
            ):
                raise InvalidConfig(f"events[{i}].bbox", f"{b} leaves the grid extent {extent}")

    @classmethod
    def from_json(cls, obj: dict) -> "SynthConfig":
        def req(key):
            if key not in obj:
                raise InvalidConfig(key, "missing")
            return obj[key]

        try:
            g = req("grid")
            grid = GridSpec(
                g["origin_lon"], g["origin_lat"], g["pixel_size"], g["width"], g["height"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig("grid", str(exc)) from None

        def profile(section: dict, key: str, default: ReflectanceProfile):
            if key not in section:
                return default
            p = section[key]
            return ReflectanceProfile(p["red"], p["green"], p["blue"], p["nir"])

        sar = obj.get("sar", {})
        optical = obj.get("optical", {})
        events = []
        for i, ev in enumerate(obj.get("events", [])):
            try:
                events.append(
                    SynthEvent(
                        kind=ev["kind"],
                        bbox=BoundingBox(*ev["bbox"]),
                        start=parse_timestamp(ev["start"]),
                        magnitude_db=ev.get("magnitude_db"),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidConfig(f"events[{i}]", str(exc)) from None
        land_bbox = obj.get("land_bbox")
        defaults = cls.__dataclass_fields__
        return cls(
            seed=int(req("seed")),
            grid=grid,
            start=parse_timestamp(req("start")),
            cadence_days=int(req("cadence_days")),
            count=int(req("count")),
            sensors=tuple(Sensor(s) for s in obj.get("sensors", ["SAR", "OPTICAL"])),
            sar_background_db=float(sar.get("background_db", -12.0)),
            speckle_sigma_db=float(sar.get("speckle_sigma_db", 1.0)),
            sea=profile(optical, "sea", defaults["sea"].default),
            land=profile(optical, "land", defaults["land"].default),
            pumice=profile(optical, "pumice", defaults["pumice"].default),
            cloud=profile(optical, "cloud", defaults["cloud"].default),
            cloud_fraction=float(optical.get("cloud_fraction", 0.0)),
            land_bbox=BoundingBox(*land_bbox) if land_bbox else None,
            events=tuple(events),
        )


@dataclass(frozen=True)
class EventTruth:
    kind: str
    bbox: BoundingBox
    onset: datetime
    magnitude_db: float | None
    mask: np.ndarray


@dataclass(frozen=True)
class GroundTruth:
    grid: GridSpec
    events: tuple[EventTruth, ...]
    clouds: dict[str, np.ndarray] = field(default_factory=dict)
    land: np.ndarray | None = None


def _bbox_polygon(b: BoundingBox) -> GeoPolygon:
    return GeoPolygon([(b.west, b.south), (b.east, b.south), (b.east, b.north), (b.west, b.north)])


def _cloud_mask(rng: np.random.Generator, height: int, width: int, fraction: float) -> np.ndarray:
    """Random axis-aligned rectangles until the pixel fraction is reached.

    Each rectangle covers at most ~1.2% of the grid, keeping the final
    coverage within 2 percentage points of the target.
    """
    mask = np.zeros((height, width), dtype=bool)
    if fraction <= 0.0:
        return mask
    target = fraction * height * width
    max_h = max(1, int(height * 0.11))
    max_w = max(1, int(width * 0.11))
    while mask.sum() < target:
        rh = int(rng.integers(max(1, max_h // 3), max_h + 1))
        rw = int(rng.integers(max(1, max_w // 3), max_w + 1))
        r0 = int(rng.integers(0, height - rh + 1))
        c0 = int(rng.integers(0, width - rw + 1))
        mask[r0 : r0 + rh, c0 : c0 + rw] = True
    return mask


def generate(config: SynthConfig, out_dir: str | Path) -> GroundTruth:
    """Write a full catalog (scenes, land mask, ground_truth.json) to out_dir."""
    out_dir = Path(out_dir)
    rng = np.random.default_rng(config.seed)
    grid = config.grid
    shape = (grid.height, grid.width)

    truths = tuple(
        EventTruth(ev.kind, ev.bbox, ev.start, ev.magnitude_db, rasterize_polygon(_bbox_polygon(ev.bbox), grid))
        for ev in config.events
    )
    land = (
        rasterize_polygon(_bbox_polygon(config.land_bbox), grid)
        if config.land_bbox is not None
        else np.zeros(shape, dtype=bool)
    )

    cat.Catalog.create(out_dir)
    cat.set_land_mask(out_dir, Raster(grid, {"land": land.astype(np.float32)}))

    dates = [
        parse_timestamp(config.start) + timedelta(days=i * config.cadence_days)
        for i in range(config.count)
    ]
    clouds: dict[str, np.ndarray] = {}
    staging = out_dir / ".staging.grsp"
    for sensor in config.sensors:
        for ts in dates:
            if sensor is Sensor.SAR:
                raster = _sar_scene(config, truths, ts, rng)
            else:
                raster, cloud = _optical_scene(config, truths, land, ts, rng)
            write_container(raster, staging)
            scene_id = cat.ingest(out_dir, staging, sensor, ts)
            if sensor is Sensor.OPTICAL:
                clouds[scene_id] = cloud
    if staging.exists():
        staging.unlink()

    truth = GroundTruth(grid, truths, clouds, land)
    _write_ground_truth_json(out_dir, config, truth)
    return truth


def _sar_scene(config, truths, ts, rng) -> Raster:
    base = np.full((config.grid.height, config.grid.width), config.sar_background_db, dtype=np.float64)
    for ev in truths:
        if ev.kind == "construct" and ts >= ev.onset:
            base[ev.mask] += ev.magnitude_db
        elif ev.kind == "destruct" and ts >= ev.onset:
            base[ev.mask] -= ev.magnitude_db
    base += rng.normal(0.0, config.speckle_sigma_db, base.shape)
    return Raster(config.grid, {"vv": base.astype(np.float32)})


def _optical_scene(config, truths, land, ts, rng) -> tuple[Raster, np.ndarray]:
    shape = (config.grid.height, config.grid.width)
    cloud = _cloud_mask(rng, shape[0], shape[1], config.cloud_fraction)
    bands = {}
    for name in ("red", "green", "blue", "nir"):
        plane = np.full(shape, getattr(config.sea, name), dtype=np.float32)
        plane[land] = getattr(config.land, name)
        for ev in truths:
            if ev.kind == "pumice_raft" and ts >= ev.onset:
                plane[ev.mask] = getattr(config.pumice, name)
        plane[cloud] = getattr(config.cloud, name)
        bands[name] = plane
    bands["cloud"] = cloud.astype(np.float32)
    return Raster(config.grid, bands), cloud


def _write_ground_truth_json(out_dir: Path, config: SynthConfig, truth: GroundTruth) -> None:
    doc = {
        "seed": config.seed,
        "events": [
            {
                "kind": ev.kind,
                "bbox": [ev.bbox.west, ev.bbox.south, ev.bbox.east, ev.bbox.north],
                "onset": format_timestamp(ev.onset),
                "magnitude_db": ev.magnitude_db,
                "pixels": int(ev.mask.sum()),
            }
            for ev in truth.events
        ],
        "clouds": {sid: int(m.sum()) for sid, m in sorted(truth.clouds.items())},
    }
    path = out_dir / "ground_truth.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_ground_truth(root: str | Path) -> GroundTruth:
    """Rebuild event masks from ground_truth.json over the catalog grid."""
    root = Path(root)
    doc = json.loads((root / "ground_truth.json").read_text())
    catalog = cat.Catalog.open(root)
    if not catalog.scenes:
        raise InvalidConfig("ground_truth", "catalog has no scenes")
    grid = catalog.load(catalog.scenes[0]).grid
    events = tuple(
        EventTruth(
            ev["kind"],
            BoundingBox(*ev["bbox"]),
            parse_timestamp(ev["onset"]),
            ev.get("magnitude_db"),
            rasterize_polygon(_bbox_polygon(BoundingBox(*ev["bbox"])), grid),
        )
        for ev in doc["events"]
    )
    return GroundTruth(grid, events)


def score_masks(predicted: np.ndarray, truth: np.ndarray) -> dict[str, float]:
    """IoU, precision and recall of a predicted mask against ground truth.

    Empty-vs-empty counts as perfect agreement (all three equal 1).
    """
    p = np.asarray(predicted, dtype=bool)
    t = np.asarray(truth, dtype=bool)
    if p.shape != t.shape:
        raise ShapeMismatch(f"predicted {p.shape} vs truth {t.shape}")
    tp = int((p & t).sum())
    union = int((p | t).sum())
    n_pred = int(p.sum())
    n_true = int(t.sum())
    return {
        "iou": 1.0 if union == 0 else tp / union,
        "precision": 1.0 if n_pred == 0 else tp / n_pred,
        "recall": 1.0 if n_true == 0 else tp / n_true,
    }
