"""Catalog: ingest rules, manifest ordering, window/bbox queries."""

import json
from datetime import timedelta

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import GRID, build_catalog, optical_raster, sar_raster, utc
from grasp_earth.catalog import (
    Catalog,
    DateWindow,
    Sensor,
    ingest,
    set_land_mask,
)
from grasp_earth.container import write_container
from grasp_earth.errors import DuplicateId, IoFailure, MissingBand
from grasp_earth.raster import BoundingBox, GridSpec, Raster

BBOX = GRID.extent


def test_optical_without_cloud_band_is_rejected(tmp_path):
    grid = GRID
    bands = {
        name: np.zeros((grid.height, grid.width), np.float32)
        for name in ("red", "green", "blue", "nir")
    }
    path = tmp_path / "no_cloud.grsp"
    write_container(Raster(grid, bands), path)
    with pytest.raises(MissingBand) as exc:
        ingest(tmp_path / "cat", path, Sensor.OPTICAL, "2021-01-01")
    assert exc.value.band == "cloud"


def test_sar_missing_vv_is_rejected(tmp_path):
    path = tmp_path / "wrong.grsp"
    write_container(optical_raster(), path)
    with pytest.raises(MissingBand) as exc:
        ingest(tmp_path / "cat", path, Sensor.SAR, "2021-01-01")
    assert exc.value.band == "vv"


def test_reingest_is_idempotent(tmp_path):
    path = tmp_path / "s.grsp"
    write_container(sar_raster(value=3.0), path)
    id1 = ingest(tmp_path / "cat", path, Sensor.SAR, "2021-01-05")
    id2 = ingest(tmp_path / "cat", path, Sensor.SAR, "2021-01-05")
    assert id1 == id2
    assert len(Catalog.open(tmp_path / "cat").scenes) == 1


def test_different_content_same_slot_is_duplicate(tmp_path):
    p1, p2 = tmp_path / "a.grsp", tmp_path / "b.grsp"
    write_container(sar_raster(value=1.0), p1)
    write_container(sar_raster(value=2.0), p2)
    ingest(tmp_path / "cat", p1, Sensor.SAR, "2021-01-05")
    with pytest.raises(DuplicateId):
        ingest(tmp_path / "cat", p2, Sensor.SAR, "2021-01-05")


def test_manifest_lists_scenes_in_timestamp_order(tmp_path):
    root = tmp_path / "cat"
    # ingest out of order on purpose
    order = [7, 2, 9, 0, 4, 1, 8, 3, 6, 5]
    for i in order:
        path = tmp_path / f"s{i}.grsp"
        write_container(sar_raster(value=float(i)), path)
        ingest(root, path, Sensor.SAR, utc(2021, 1, 1) + timedelta(days=i))
    manifest = json.loads((root / "manifest.json").read_text())
    stamps = [e["timestamp"] for e in manifest["scenes"]]
    assert len(stamps) == 10
    assert stamps == sorted(stamps)
    cat = Catalog.open(root)
    assert [sc.timestamp for sc in cat.scenes] == sorted(sc.timestamp for sc in cat.scenes)


def test_query_empty_window(daily_sar_catalog):
    window = DateWindow(utc(2030, 1, 1), 5, 5)
    assert daily_sar_catalog.query(Sensor.SAR, window, BBOX) == []


def test_query_boundaries_inclusive(daily_sar_catalog):
    window = DateWindow(utc(2021, 1, 10), 0, 0)
    scenes = daily_sar_catalog.query(Sensor.SAR, window, BBOX)
    assert len(scenes) == 1 and scenes[0].timestamp == utc(2021, 1, 10)


def test_query_two_week_window_over_30_daily_scenes(daily_sar_catalog):
    # scenes on days 1..30; center day 15 reaches day 1..29 inclusive
    window = DateWindow(utc(2021, 1, 15), 14, 14)
    scenes = daily_sar_catalog.query(Sensor.SAR, window, BBOX)
    expected = [
        utc(2021, 1, 1) + timedelta(days=i)
        for i in range(30)
        if abs((utc(2021, 1, 1) + timedelta(days=i)) - utc(2021, 1, 15)) <= timedelta(days=14)
    ]
    assert [sc.timestamp for sc in scenes] == expected
    assert len(scenes) == 29


def test_query_respects_bbox(daily_sar_catalog):
    elsewhere = BoundingBox(0.0, 0.0, 1.0, 1.0)
    window = DateWindow(utc(2021, 1, 15), 14, 14)
    assert daily_sar_catalog.query(Sensor.SAR, window, elsewhere) == []


def test_query_stable_across_calls(daily_sar_catalog):
    window = DateWindow(utc(2021, 1, 15), 10, 10)
    a = daily_sar_catalog.query(Sensor.SAR, window, BBOX)
    b = daily_sar_catalog.query(Sensor.SAR, window, BBOX)
    assert a == b


@given(
    narrow=st.integers(min_value=0, max_value=20),
    extra=st.integers(min_value=0, max_value=20),
)
@settings(
    max_examples=40,
    deadline=None,
    # catalog snapshot is immutable, safe to share across examples
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
def test_widening_window_never_removes_results(daily_sar_catalog, narrow, extra):
    center = utc(2021, 1, 12)
    small = daily_sar_catalog.query(Sensor.SAR, DateWindow(center, narrow, narrow), BBOX)
    large = daily_sar_catalog.query(
        Sensor.SAR, DateWindow(center, narrow + extra, narrow + extra), BBOX
    )
    assert {sc.id for sc in small} <= {sc.id for sc in large}


def test_land_mask_resampled_to_grid(tmp_path):
    root = tmp_path / "cat"
    path = tmp_path / "s.grsp"
    write_container(sar_raster(), path)
    ingest(root, path, Sensor.SAR, "2021-01-01")
    # land mask on a coarser grid than the scenes
    coarse = GridSpec(139.0, 36.0, 0.02, 10, 10)
    land = np.zeros((10, 10), np.float32)
    land[:, :5] = 1.0  # western half is land
    set_land_mask(root, Raster(coarse, {"land": land}))
    cat = Catalog.open(root)
    plane = cat.land_mask_on(GRID)
    assert plane.shape == (20, 20)
    assert plane[:, :10].all() and not plane[:, 10:].any()


def test_missing_land_mask_raises(daily_sar_catalog):
    with pytest.raises(MissingBand) as exc:
        daily_sar_catalog.land_mask_on(GRID)
    assert exc.value.band == "land_mask"


def test_malformed_manifest_raises_io_failure(tmp_path):
    root = tmp_path / "cat"
    root.mkdir()
    (root / "manifest.json").write_text("{not json")
    with pytest.raises(IoFailure):
        Catalog.open(root)


def test_manifest_missing_scene_file_raises(tmp_path):
    root = tmp_path / "cat"
    path = tmp_path / "s.grsp"
    write_container(sar_raster(), path)
    ingest(root, path, Sensor.SAR, "2021-01-01")
    next(root.glob("scenes/*.grsp")).unlink()
    with pytest.raises(IoFailure):
        Catalog.open(root)
