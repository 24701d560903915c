"""HTTP tile/analysis service over a scene catalog.

Layers are computed once per spec (thresholds resolved globally, not per
tile), cached in a bounded LRU and rendered into 256x256 RGBA PNG tiles on
demand. All handler logic is pure over the immutable catalog snapshot, so
identical requests return identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import engine, render
from .catalog import Catalog, Sensor, format_timestamp, parse_timestamp
from .errors import (
    CalibrationInconsistent,
    DegenerateSamples,
    DuplicateId,
    EmptyIntersection,
    EmptyPolygonFootprint,
    GraspError,
    InvalidConfig,
    NoScenesInWindow,
)
from .raster import GeoPolygon, Raster, TileKey, resample_to_tile

_STATUS_BY_ERROR = {
    NoScenesInWindow: 404,
    EmptyPolygonFootprint: 404,
    CalibrationInconsistent: 409,
    DegenerateSamples: 409,
    DuplicateId: 409,
}


def _error_status(exc: GraspError) -> int:
    for cls, status in _STATUS_BY_ERROR.items():
        if isinstance(exc, cls):
            return status
    return 422


# ---------------------------------------------------------------------------
# Layer specs (request bodies)


class SarCalibrationBody(BaseModel):
    constructed: list[tuple[float, float]]
    destructed: list[tuple[float, float]]


class PumiceCalibrationBody(BaseModel):
    pumice: list[tuple[float, float]]
    non_pumice: list[tuple[float, float]]


class SarChangeSpec(BaseModel):
    kind: Literal["sar_change"]
    date1: str
    date2: str
    calibration: SarCalibrationBody
    window_days: int = 12


class RgbCompositeSpec(BaseModel):
    kind: Literal["rgb_composite"]
    date: str
    window_days: int = 14
    stretch: tuple[float, float] = render.DEFAULT_RGB_STRETCH


class SarIntensitySpec(BaseModel):
    kind: Literal["sar_intensity"]
    date: str
    window_days: int = 12
    stretch: tuple[float, float] = render.DEFAULT_SAR_STRETCH


class PumiceSpec(BaseModel):
    kind: Literal["pumice"]
    date: str
    calibration: PumiceCalibrationBody


LayerSpec = Annotated[
    Union[SarChangeSpec, RgbCompositeSpec, SarIntensitySpec, PumiceSpec],
    Field(discriminator="kind"),
]


class PolygonBody(BaseModel):
    exterior: list[tuple[float, float]]
    interiors: list[list[tuple[float, float]]] = Field(default_factory=list)


class DateRangeBody(BaseModel):
    start: str
    end: str


class TimeseriesRequest(BaseModel):
    polygon: Union[PolygonBody, list[tuple[float, float]]]
    sensor: str = "SAR"
    band: str = "vv"
    date_range: DateRangeBody | None = None


class PumiceAnalysisRequest(BaseModel):
    date: str
    calibration: PumiceCalibrationBody


# ---------------------------------------------------------------------------
# Layer cache


@dataclass
class Layer:
    id: str
    kind: str
    payload: Raster
    meta: dict = field(default_factory=dict)
    stretch: tuple[float, float] | None = None


class LayerCache:
    """Bounded LRU; eviction drops the layer and thereby its tiles."""

    def __init__(self, capacity: int):
        self.capacity = max(1, capacity)
        self._layers: OrderedDict[str, Layer] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, layer_id: str) -> Layer | None:
        with self._lock:
            layer = self._layers.get(layer_id)
            if layer is not None:
                self._layers.move_to_end(layer_id)
            return layer

    def put(self, layer: Layer) -> None:
        with self._lock:
            self._layers[layer.id] = layer
            self._layers.move_to_end(layer.id)
            while len(self._layers) > self.capacity:
                self._layers.popitem(last=False)


def _layer_id(spec: BaseModel) -> str:
    canonical = json.dumps(spec.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _parse_date_field(spec, name: str) -> str:
    value = getattr(spec, name)
    try:
        parse_timestamp(value)
    except ValueError as exc:
        raise InvalidConfig(name, f"not an ISO-8601 date: {exc}") from None
    return value


def _compute_layer(catalog: Catalog, spec) -> Layer:
    bbox = catalog.extent
    if bbox is None:
        raise NoScenesInWindow("catalog is empty")
    for name in ("date", "date1", "date2"):
        if hasattr(spec, name):
            _parse_date_field(spec, name)
    layer_id = _layer_id(spec)
    if isinstance(spec, SarChangeSpec):
        calib = engine.CalibrationSet(
            tuple(map(tuple, spec.calibration.constructed)),
            tuple(map(tuple, spec.calibration.destructed)),
        )
        change = engine.sar_change(
            catalog, spec.date1, spec.date2, calib, bbox, spec.window_days
        )
        payload = Raster(
            change.grid,
            {
                "blue": change.blue_mask.astype(np.float32),
                "red": change.red_mask.astype(np.float32),
            },
        )
        meta = {
            "thresholds": {
                "blue": change.thresholds.blue,
                "red": change.thresholds.red,
            }
        }
        return Layer(layer_id, spec.kind, payload, meta)
    if isinstance(spec, PumiceSpec):
        calib = engine.PumiceCalibration(
            tuple(map(tuple, spec.calibration.pumice)),
            tuple(map(tuple, spec.calibration.non_pumice)),
        )
        result = engine.detect_pumice(catalog, spec.date, calib, bbox)
        payload = Raster(result.grid, {"pumice": result.mask.astype(np.float32)})
        meta = {"threshold": result.threshold, "scene_id": result.scene_id}
        return Layer(layer_id, spec.kind, payload, meta)
    if isinstance(spec, RgbCompositeSpec):
        composite = engine.temporal_composite(
            catalog, Sensor.OPTICAL, spec.date, bbox, spec.window_days
        )
        return Layer(layer_id, spec.kind, composite, stretch=tuple(spec.stretch))
    composite = engine.temporal_composite(
        catalog, Sensor.SAR, spec.date, bbox, spec.window_days
    )
    return Layer(layer_id, spec.kind, composite, stretch=tuple(spec.stretch))


def _render_tile(layer: Layer, key: TileKey) -> bytes:
    try:
        tile = resample_to_tile(layer.payload, key)
    except EmptyIntersection:
        return render.png_bytes(render.transparent_tile())
    if layer.kind == "sar_change":
        rgba = render.render_change(tile)
    elif layer.kind == "pumice":
        rgba = render.render_pumice(tile)
    elif layer.kind == "rgb_composite":
        rgba = render.render_rgb(tile, layer.stretch)
    else:
        rgba = render.render_sar(tile, layer.stretch)
    return render.png_bytes(rgba)


# ---------------------------------------------------------------------------
# Application


DEFAULT_BASEMAP = "https://tile.openstreetmap.org/{z}/{x}/{y}.png"


def create_app(
    catalog_root: str | Path | None,
    cache_layers: int = 64,
    basemap_url: str = DEFAULT_BASEMAP,
    viewer_dist: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="grasp-earth tile service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    catalog: Catalog | None = None
    load_error: str | None = None
    if catalog_root is None:
        load_error = "no catalog configured (use --catalog or GRASP_CATALOG)"
    else:
        try:
            catalog = Catalog.open(catalog_root)
        except GraspError as exc:
            load_error = str(exc)
    app.state.catalog = catalog
    app.state.load_error = load_error
    cache = LayerCache(cache_layers)
    app.state.layer_cache = cache

    @app.exception_handler(GraspError)
    async def _grasp_error(request: Request, exc: GraspError):
        return JSONResponse(
            status_code=_error_status(exc), content={"error": exc.code, "detail": str(exc)}
        )

    class _ServiceUnavailable(Exception):
        def __init__(self, detail: str):
            self.detail = detail

    def _catalog() -> Catalog:
        if catalog is None:
            raise _ServiceUnavailable(load_error or "catalog not loaded")
        return catalog

    @app.exception_handler(_ServiceUnavailable)
    async def _unavailable(request: Request, exc: _ServiceUnavailable):
        return JSONResponse(status_code=503, content={"error": "CatalogUnavailable", "detail": exc.detail})

    @app.get("/config")
    def get_config():
        return {
            "api_base": "",
            "basemap_url": basemap_url,
            "basemap_attribution": "basemap © its provider",
        }

    @app.get("/catalog")
    def get_catalog():
        cat = _catalog()
        sensors = {}
        for sensor in Sensor:
            rng = cat.date_range(sensor)
            count = sum(1 for sc in cat.scenes if sc.sensor is sensor)
            if rng:
                sensors[sensor.value] = {
                    "count": count,
                    "first": format_timestamp(rng[0]),
                    "last": format_timestamp(rng[1]),
                }
        extent = cat.extent
        return {
            "version": cat.version,
            "scene_count": len(cat.scenes),
            "bbox": [extent.west, extent.south, extent.east, extent.north] if extent else None,
            "sensors": sensors,
            "scenes": [
                {
                    "id": sc.id,
                    "sensor": sc.sensor.value,
                    "timestamp": format_timestamp(sc.timestamp),
                    "bbox": [sc.bbox.west, sc.bbox.south, sc.bbox.east, sc.bbox.north],
                }
                for sc in cat.scenes
            ],
        }

    def _get_or_create_layer(spec) -> Layer:
        cat = _catalog()
        layer_id = _layer_id(spec)
        layer = cache.get(layer_id)
        if layer is None:
            layer = _compute_layer(cat, spec)
            cache.put(layer)
        return layer

    @app.post("/layers")
    def post_layers(spec: LayerSpec):
        layer = _get_or_create_layer(spec)
        return {"layer_id": layer.id, "kind": layer.kind, **layer.meta}

    @app.get("/tiles/{layer_id}/{z}/{x}/{y}.png")
    def get_tile(layer_id: str, z: int, x: int, y: int, request: Request):
        if not (0 <= z <= 22) or not (0 <= x < (1 << z)) or not (0 <= y < (1 << z)):
            return JSONResponse(
                status_code=400,
                content={"error": "InvalidTileIndex", "detail": f"({z}, {x}, {y})"},
            )
        _catalog()
        layer = cache.get(layer_id)
        if layer is None:
            return JSONResponse(
                status_code=404,
                content={"error": "UnknownLayer", "detail": f"layer {layer_id!r} not cached"},
            )
        cat = _catalog()
        etag = '"' + hashlib.sha256(
            f"{layer_id}/{z}/{x}/{y}/{cat.version}".encode()
        ).hexdigest()[:16] + '"'
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        body = _render_tile(layer, TileKey(z, x, y))
        return Response(
            content=body,
            media_type="image/png",
            headers={"ETag": etag, "Cache-Control": "public, max-age=3600"},
        )

    @app.post("/analysis/timeseries")
    def post_timeseries(req: TimeseriesRequest):
        cat = _catalog()
        if isinstance(req.polygon, PolygonBody):
            poly = GeoPolygon(req.polygon.exterior, req.polygon.interiors)
        else:
            poly = GeoPolygon(req.polygon)
        try:
            sensor = Sensor(req.sensor)
        except ValueError:
            raise InvalidConfig("sensor", f"unknown sensor {req.sensor!r}") from None
        date_range = None
        if req.date_range:
            _parse_date_field(req.date_range, "start")
            _parse_date_field(req.date_range, "end")
            date_range = (req.date_range.start, req.date_range.end)
        samples = engine.zonal_timeseries(cat, poly, sensor, req.band, date_range)
        return {
            "samples": [
                {
                    "timestamp": format_timestamp(s.timestamp),
                    "mean": s.mean,
                    "count": s.count,
                }
                for s in samples
            ]
        }

    @app.post("/analysis/pumice")
    def post_pumice(req: PumiceAnalysisRequest):
        spec = PumiceSpec(kind="pumice", date=req.date, calibration=req.calibration)
        layer = _get_or_create_layer(spec)
        return {"layer_id": layer.id, **layer.meta}

    if viewer_dist is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(viewer_dist), html=True), name="viewer")

    return app
