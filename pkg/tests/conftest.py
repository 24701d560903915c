"""Shared fixtures: tiny rasters and throwaway catalogs."""

from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from grasp_earth.catalog import Catalog, Sensor, ingest
from grasp_earth.container import write_container
from grasp_earth.raster import GridSpec, Raster

GRID = GridSpec(139.0, 36.0, 0.01, 20, 20)


def utc(*args) -> datetime:
    return datetime(*args, tzinfo=timezone.utc)


def sar_raster(grid=GRID, value=0.0, valid=None) -> Raster:
    data = np.full((grid.height, grid.width), value, dtype=np.float32)
    return Raster(grid, {"vv": data}, valid)


def optical_raster(grid=GRID, value=0.1, cloud=None, valid=None) -> Raster:
    shape = (grid.height, grid.width)
    if cloud is None:
        cloud = np.zeros(shape, dtype=np.float32)
    bands = {
        name: np.full(shape, value, dtype=np.float32)
        for name in ("red", "green", "blue", "nir")
    }
    bands["cloud"] = np.asarray(cloud, dtype=np.float32)
    return Raster(grid, bands, valid)


def build_catalog(root, scenes) -> Catalog:
    """scenes: iterable of (sensor, timestamp, raster)."""
    root.mkdir(parents=True, exist_ok=True)
    staging = root / ".staging.grsp"
    for sensor, ts, raster in scenes:
        write_container(raster, staging)
        ingest(root, staging, sensor, ts)
    if staging.exists():
        staging.unlink()
    return Catalog.open(root)


@pytest.fixture
def daily_sar_catalog(tmp_path):
    scenes = [
        (Sensor.SAR, utc(2021, 1, 1) + timedelta(days=i), sar_raster(value=float(i)))
        for i in range(30)
    ]
    return build_catalog(tmp_path / "cat", scenes)


def cells_to_lonlat(grid: GridSpec, cells) -> list[tuple[float, float]]:
    return [
        (
            grid.origin_lon + (col + 0.5) * grid.pixel_size,
            grid.origin_lat - (row + 0.5) * grid.pixel_size,
        )
        for row, col in cells
    ]


def calibration_points(
    mask, grid: GridSpec, rng, n_inside=50, n_outside=50, margin_px=15
) -> list[tuple[float, float]]:
    """Sample points for one calibration class: a mix of changed pixels and
    nearby unchanged ones, the way a user outlines an area around a site."""
    inside = np.argwhere(mask)
    r0, c0 = inside.min(axis=0)
    r1, c1 = inside.max(axis=0)
    box = np.zeros_like(mask)
    box[
        max(0, r0 - margin_px) : min(grid.height, r1 + margin_px + 1),
        max(0, c0 - margin_px) : min(grid.width, c1 + margin_px + 1),
    ] = True
    outside = np.argwhere(box & ~mask)
    picks = [
        inside[rng.choice(len(inside), size=min(n_inside, len(inside)), replace=False)],
        outside[rng.choice(len(outside), size=min(n_outside, len(outside)), replace=False)],
    ]
    return cells_to_lonlat(grid, np.concatenate(picks))
