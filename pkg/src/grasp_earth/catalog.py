"""Catalog of timestamped scenes over a filesystem layout.

    catalog_root/
        manifest.json
        scenes/*.grsp
        static/land_mask.grsp      (optional)

A loaded Catalog is an immutable snapshot; ingesting rewrites the manifest
atomically so concurrent readers keep a consistent view.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path

import numpy as np

from .container import read_container, write_container
from .errors import DuplicateId, IoFailure, MissingBand, NoScenesInWindow
from .raster import BoundingBox, GridSpec, Raster, resample_to_grid

MANIFEST_NAME = "manifest.json"
SCENES_DIR = "scenes"
STATIC_DIR = "static"
LAND_MASK_NAME = "land_mask.grsp"


class Sensor(str, Enum):
    SAR = "SAR"
    OPTICAL = "OPTICAL"


# band roles every scene of a sensor must carry
SAR_ROLES = ("vv",)
OPTICAL_ROLES = ("red", "green", "blue", "nir", "cloud")


def parse_timestamp(value: str | datetime) -> datetime:
    """ISO-8601 string (date or datetime, Z suffix ok) to aware UTC."""
    if isinstance(value, datetime):
        dt = value
    else:
        dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return parse_timestamp(dt).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class DateWindow:
    """Inclusive time window [center - before, center + after] in days."""

    center: datetime
    before: int
    after: int

    def __post_init__(self):
        if self.before < 0 or self.after < 0:
            raise ValueError("window days must be >= 0")

    @property
    def start(self) -> datetime:
        return parse_timestamp(self.center) - timedelta(days=self.before)

    @property
    def end(self) -> datetime:
        return parse_timestamp(self.center) + timedelta(days=self.after)


@dataclass(frozen=True)
class Scene:
    id: str
    sensor: Sensor
    timestamp: datetime
    bbox: BoundingBox
    path: str  # relative to the catalog root


def _check_roles(raster: Raster, sensor: Sensor) -> None:
    names = set(raster.band_names)
    required = SAR_ROLES if sensor is Sensor.SAR else OPTICAL_ROLES
    for role in required:
        if role not in names:
            raise MissingBand(role)
    if sensor is Sensor.SAR and "cloud" in names:
        raise ValueError("SAR scenes must not carry a cloud band")


def _scene_id(sensor: Sensor, timestamp: datetime) -> str:
    return f"{sensor.value.lower()}-{timestamp.strftime('%Y%m%dT%H%M%S')}"


class Catalog:
    """Load-once snapshot of a catalog directory."""

    def __init__(self, root: Path, manifest: dict, manifest_bytes: bytes):
        self.root = root
        self.version = hashlib.sha256(manifest_bytes).hexdigest()[:16]
        self._land_mask_path = manifest.get("static", {}).get("land_mask")
        self._scenes: list[Scene] = []
        seen: set[str] = set()
        for entry in manifest.get("scenes", []):
            if entry["id"] in seen:
                raise IoFailure(f"manifest has duplicate scene id {entry['id']!r}")
            seen.add(entry["id"])
            w, s, e, n = entry["bbox"]
            scene = Scene(
                id=entry["id"],
                sensor=Sensor(entry["sensor"]),
                timestamp=parse_timestamp(entry["timestamp"]),
                bbox=BoundingBox(w, s, e, n),
                path=entry["path"],
            )
            if not (root / scene.path).is_file():
                raise IoFailure(f"scene file missing: {root / scene.path}")
            self._scenes.append(scene)
        if self._land_mask_path and not (root / self._land_mask_path).is_file():
            raise IoFailure(f"land mask missing: {root / self._land_mask_path}")
        self._scenes.sort(key=lambda sc: (sc.timestamp, sc.id))
        self._by_id = {sc.id: sc for sc in self._scenes}
        self._cache: dict[str, Raster] = {}
        self._lock = threading.Lock()

    # -- loading -----------------------------------------------------------

    @classmethod
    def open(cls, root: str | Path) -> "Catalog":
        root = Path(root)
        manifest_path = root / MANIFEST_NAME
        try:
            raw = manifest_path.read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read {manifest_path}: {exc}") from exc
        try:
            manifest = json.loads(raw)
        except ValueError as exc:
            raise IoFailure(f"malformed manifest {manifest_path}: {exc}") from exc
        try:
            return cls(root, manifest, raw)
        except (KeyError, TypeError, ValueError) as exc:
            raise IoFailure(f"malformed manifest {manifest_path}: {exc!r}") from exc

    @classmethod
    def create(cls, root: str | Path) -> "Catalog":
        """Initialize an empty catalog layout (no-op if one exists)."""
        root = Path(root)
        if not (root / MANIFEST_NAME).exists():
            root.mkdir(parents=True, exist_ok=True)
            _write_manifest(root, {"scenes": [], "static": {}})
        return cls.open(root)

    # -- queries -----------------------------------------------------------

    @property
    def scenes(self) -> tuple[Scene, ...]:
        return tuple(self._scenes)

    def scene(self, scene_id: str) -> Scene:
        try:
            return self._by_id[scene_id]
        except KeyError:
            raise NoScenesInWindow(f"unknown scene id {scene_id!r}") from None

    def query(self, sensor: Sensor, window: DateWindow, bbox: BoundingBox) -> list[Scene]:
        """Scenes of a sensor inside the window (inclusive) intersecting bbox,
        ascending by timestamp."""
        return [
            sc
            for sc in self._scenes
            if sc.sensor is sensor
            and window.start <= sc.timestamp <= window.end
            and sc.bbox.intersects(bbox)
        ]

    def load(self, scene: Scene | str) -> Raster:
        if isinstance(scene, str):
            scene = self.scene(scene)
        with self._lock:
            cached = self._cache.get(scene.id)
        if cached is not None:
            return cached
        raster = read_container(self.root / scene.path)
        with self._lock:
            self._cache[scene.id] = raster
        return raster

    @property
    def extent(self) -> BoundingBox | None:
        boxes = [sc.bbox for sc in self._scenes]
        if not boxes:
            return None
        out = boxes[0]
        for b in boxes[1:]:
            out = out.union(b)
        return out

    def date_range(self, sensor: Sensor | None = None) -> tuple[datetime, datetime] | None:
        stamps = [sc.timestamp for sc in self._scenes if sensor is None or sc.sensor is sensor]
        if not stamps:
            return None
        return min(stamps), max(stamps)

    def land_mask_on(self, grid: GridSpec) -> np.ndarray:
        """Land plane (True = land) resampled nearest onto a grid.

        Pixels outside the stored mask's extent count as sea.
        """
        if not self._land_mask_path:
            raise MissingBand("land_mask")
        with self._lock:
            cached = self._cache.get("__land_mask__")
        if cached is None:
            cached = read_container(self.root / self._land_mask_path)
            with self._lock:
                self._cache["__land_mask__"] = cached
        resampled = resample_to_grid(cached, grid)
        band = resampled.bands[resampled.band_names[0]]
        return (band > 0.5) & resampled.valid


def _write_manifest(root: Path, manifest: dict) -> None:
    blob = json.dumps(manifest, indent=2, sort_keys=True).encode("utf-8") + b"\n"
    tmp = root / (MANIFEST_NAME + ".tmp")
    try:
        tmp.write_bytes(blob)
        tmp.replace(root / MANIFEST_NAME)
    except OSError as exc:
        raise IoFailure(f"cannot write manifest in {root}: {exc}") from exc


def _manifest_dict(scenes: list[Scene], land_mask: str | None) -> dict:
    return {
        "scenes": [
            {
                "id": sc.id,
                "sensor": sc.sensor.value,
                "timestamp": format_timestamp(sc.timestamp),
                "bbox": [sc.bbox.west, sc.bbox.south, sc.bbox.east, sc.bbox.north],
                "path": sc.path,
            }
            for sc in sorted(scenes, key=lambda sc: (sc.timestamp, sc.id))
        ],
        "static": {"land_mask": land_mask} if land_mask else {},
    }


def ingest(
    root: str | Path,
    container_path: str | Path,
    sensor: Sensor | str,
    timestamp: str | datetime,
) -> str:
    """Register a GRSP container as a scene; returns the scene id.

    Idempotent for an identical (file, sensor, timestamp); a different file
    under the same sensor and timestamp raises DuplicateId.
    """
    root = Path(root)
    sensor = Sensor(sensor)
    ts = parse_timestamp(timestamp)
    raster = read_container(container_path)
    _check_roles(raster, sensor)

    cat = Catalog.create(root)
    scene_id = _scene_id(sensor, ts)
    incoming = Path(container_path).read_bytes()
    existing = cat._by_id.get(scene_id)
    if existing is not None:
        if (root / existing.path).read_bytes() == incoming:
            return scene_id
        raise DuplicateId(f"scene {scene_id!r} already ingested with different content")

    rel_path = f"{SCENES_DIR}/{scene_id}.grsp"
    (root / SCENES_DIR).mkdir(parents=True, exist_ok=True)
    (root / rel_path).write_bytes(incoming)
    scenes = list(cat.scenes) + [
        Scene(scene_id, sensor, ts, raster.grid.extent, rel_path)
    ]
    _write_manifest(root, _manifest_dict(scenes, cat._land_mask_path))
    return scene_id


def set_land_mask(root: str | Path, raster: Raster) -> None:
    """Install a 0/1 land raster as the catalog's static land mask."""
    root = Path(root)
    cat = Catalog.create(root)
    rel_path = f"{STATIC_DIR}/{LAND_MASK_NAME}"
    write_container(raster, root / rel_path)
    _write_manifest(root, _manifest_dict(list(cat.scenes), rel_path))
