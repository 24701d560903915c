"""Self-hosted satellite change detection: raster engine, scene catalog,
synthetic oracle, tile service and CLI."""

from .catalog import Catalog, DateWindow, Scene, Sensor, ingest
from .container import read_container, write_container
from .engine import (
    CalibrationSet,
    ChangeLayer,
    PumiceCalibration,
    ThresholdPair,
    detect_pumice,
    ndwi,
    otsu_threshold,
    sar_change,
    temporal_composite,
    zonal_timeseries,
)
from .raster import (
    BoundingBox,
    GeoPolygon,
    GridSpec,
    Raster,
    TileKey,
    lonlat_to_tile,
    rasterize_polygon,
    read_window,
    resample_to_grid,
    resample_to_tile,
    tile_bounds,
)
from .synth import GroundTruth, SynthConfig, SynthEvent, generate, score_masks

__version__ = "0.1.0"
