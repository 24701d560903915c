"""HTTP service: catalog summary, layers, tiles, analysis endpoints."""

import io

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from conftest import calibration_points, cells_to_lonlat, utc
from grasp_earth.catalog import Catalog, Sensor
from grasp_earth.raster import BoundingBox, GridSpec, lonlat_to_tile, tile_bounds
from grasp_earth.service import create_app
from grasp_earth.synth import SynthConfig, SynthEvent, generate, score_masks

GRID = GridSpec(139.0, 36.0, 0.002, 128, 128)
CONSTRUCT = BoundingBox(139.010, 35.870, 139.130, 35.990)
DESTRUCT = BoundingBox(139.150, 35.880, 139.240, 35.970)
RAFT = BoundingBox(139.140, 35.800, 139.200, 35.860)
LAND = BoundingBox(139.0, 35.745, 139.256, 35.780)
ONSET = utc(2021, 1, 28)


@pytest.fixture(scope="module")
def synth_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("svc") / "cat"
    config = SynthConfig(
        seed=21,
        grid=GRID,
        start=utc(2021, 1, 1),
        cadence_days=5,
        count=12,
        speckle_sigma_db=0.0,  # noise-free: masks are exact rectangles
        cloud_fraction=0.1,
        land_bbox=LAND,
        events=(
            SynthEvent("construct", CONSTRUCT, ONSET, 6.0),
            SynthEvent("destruct", DESTRUCT, ONSET, 6.0),
            SynthEvent("pumice_raft", RAFT, ONSET),
        ),
    )
    truth = generate(config, root)
    return root, truth


@pytest.fixture(scope="module")
def client(synth_root):
    root, _ = synth_root
    return TestClient(create_app(root))


@pytest.fixture(scope="module")
def change_spec(synth_root):
    root, truth = synth_root
    rng = np.random.default_rng(3)
    # margin 10 px keeps each class's background samples off the other event
    constructed = calibration_points(truth.events[0].mask, GRID, rng, 40, 60, margin_px=10)
    destructed = calibration_points(truth.events[1].mask, GRID, rng, 40, 60, margin_px=10)
    return {
        "kind": "sar_change",
        "date1": "2021-01-10",
        "date2": "2021-02-20",
        "calibration": {"constructed": constructed, "destructed": destructed},
    }


def test_catalog_summary(client, synth_root):
    root, _ = synth_root
    res = client.get("/catalog")
    assert res.status_code == 200
    body = res.json()
    assert body["scene_count"] == 24
    cat = Catalog.open(root)
    first, last = cat.date_range(Sensor.SAR)
    assert body["sensors"]["SAR"]["first"] == "2021-01-01T00:00:00Z"
    assert body["sensors"]["SAR"]["last"] == "2021-02-25T00:00:00Z"
    assert body["sensors"]["OPTICAL"]["count"] == 12
    w, s, e, n = body["bbox"]
    assert (w, n) == (139.0, 36.0)


def test_empty_catalog_is_ok(tmp_path):
    Catalog.create(tmp_path / "empty")
    client = TestClient(create_app(tmp_path / "empty"))
    res = client.get("/catalog")
    assert res.status_code == 200
    assert res.json()["scenes"] == []
    assert res.json()["scene_count"] == 0


def test_malformed_catalog_dir_gives_503(tmp_path):
    (tmp_path / "bad").mkdir()
    (tmp_path / "bad" / "manifest.json").write_text("{broken")
    client = TestClient(create_app(tmp_path / "bad"))
    res = client.get("/catalog")
    assert res.status_code == 503
    assert "error" in res.json()


def test_missing_catalog_gives_503(tmp_path):
    client = TestClient(create_app(tmp_path / "nothere"))
    assert client.get("/catalog").status_code == 503


def test_config_endpoint(client):
    res = client.get("/config")
    assert res.status_code == 200
    assert "basemap_url" in res.json()


def test_layer_creation_is_idempotent(client, change_spec):
    a = client.post("/layers", json=change_spec)
    b = client.post("/layers", json=change_spec)
    assert a.status_code == 200 and b.status_code == 200
    assert a.json()["layer_id"] == b.json()["layer_id"]
    assert a.json()["thresholds"]["blue"] > a.json()["thresholds"]["red"]


def test_layer_spec_missing_date2_names_field(client, change_spec):
    spec = {k: v for k, v in change_spec.items() if k != "date2"}
    res = client.post("/layers", json=spec)
    assert res.status_code == 422
    assert "date2" in res.text


def test_layer_unparseable_date_names_field(client, change_spec):
    res = client.post("/layers", json={**change_spec, "date2": "not-a-date"})
    assert res.status_code == 422
    assert "date2" in res.text


def test_layer_no_scenes_in_window_is_404(client, change_spec):
    res = client.post("/layers", json={**change_spec, "date2": "2029-01-01"})
    assert res.status_code == 404
    assert res.json()["error"] == "NoScenesInWindow"


def test_degenerate_calibration_is_409(client):
    # all pumice calibration points on open sea: identical NDWI everywhere
    sea_points = cells_to_lonlat(GRID, [(60, 5), (61, 6), (62, 7), (63, 8)])
    res = client.post(
        "/analysis/pumice",
        json={"date": "2021-02-01", "calibration": {"pumice": sea_points[:2], "non_pumice": sea_points[2:]}},
    )
    assert res.status_code == 409
    assert res.json()["error"] == "DegenerateSamples"


def test_null_change_layer_renders_transparent(client, change_spec):
    spec = {**change_spec, "date2": change_spec["date1"]}
    res = client.post("/layers", json=spec)
    assert res.status_code == 200
    layer_id = res.json()["layer_id"]
    key = lonlat_to_tile(139.07, 35.93, 13)
    tile = client.get(f"/tiles/{layer_id}/{key.z}/{key.x}/{key.y}.png")
    assert tile.status_code == 200
    img = np.asarray(Image.open(io.BytesIO(tile.content)))
    assert img.shape == (256, 256, 4)
    assert (img[:, :, 3] == 0).all()


def test_blue_rectangle_fills_tile(client, change_spec, synth_root):
    _, truth = synth_root
    res = client.post("/layers", json=change_spec)
    layer_id = res.json()["layer_id"]
    key = lonlat_to_tile(139.07, 35.93, 13)
    b = tile_bounds(key)
    # the construct rectangle strictly contains this tile
    assert CONSTRUCT.west < b.west and b.east < CONSTRUCT.east
    assert CONSTRUCT.south < b.south and b.north < CONSTRUCT.north
    tile = client.get(f"/tiles/{layer_id}/{key.z}/{key.x}/{key.y}.png")
    img = np.asarray(Image.open(io.BytesIO(tile.content)))
    assert (img == np.array([0, 0, 255, 180], np.uint8)).all(axis=-1).all()


def test_tile_outside_extent_is_transparent(client, change_spec):
    layer_id = client.post("/layers", json=change_spec).json()["layer_id"]
    key = lonlat_to_tile(-50.0, 10.0, 8)
    tile = client.get(f"/tiles/{layer_id}/{key.z}/{key.x}/{key.y}.png")
    assert tile.status_code == 200
    img = np.asarray(Image.open(io.BytesIO(tile.content)))
    assert (img[:, :, 3] == 0).all()


def test_invalid_tile_indices_are_400(client, change_spec):
    layer_id = client.post("/layers", json=change_spec).json()["layer_id"]
    assert client.get(f"/tiles/{layer_id}/3/8/0.png").status_code == 400
    assert client.get(f"/tiles/{layer_id}/23/0/0.png").status_code == 400


def test_unknown_layer_is_404(client):
    assert client.get("/tiles/deadbeef/3/1/1.png").status_code == 404


def test_identical_requests_return_identical_bytes(client, change_spec):
    layer_id = client.post("/layers", json=change_spec).json()["layer_id"]
    key = lonlat_to_tile(139.07, 35.93, 12)
    url = f"/tiles/{layer_id}/{key.z}/{key.x}/{key.y}.png"
    a = client.get(url)
    b = client.get(url)
    assert a.content == b.content
    assert a.headers["etag"] == b.headers["etag"]


def test_etag_304(client, change_spec):
    layer_id = client.post("/layers", json=change_spec).json()["layer_id"]
    key = lonlat_to_tile(139.07, 35.93, 12)
    url = f"/tiles/{layer_id}/{key.z}/{key.x}/{key.y}.png"
    first = client.get(url)
    res = client.get(url, headers={"If-None-Match": first.headers["etag"]})
    assert res.status_code == 304


def test_rgb_composite_layer_renders(client):
    res = client.post("/layers", json={"kind": "rgb_composite", "date": "2021-01-15"})
    assert res.status_code == 200
    layer_id = res.json()["layer_id"]
    key = lonlat_to_tile(139.1, 35.9, 11)
    tile = client.get(f"/tiles/{layer_id}/{key.z}/{key.x}/{key.y}.png")
    img = np.asarray(Image.open(io.BytesIO(tile.content)))
    assert (img[:, :, 3] > 0).any()


def test_sar_intensity_layer_renders(client):
    res = client.post("/layers", json={"kind": "sar_intensity", "date": "2021-01-15"})
    assert res.status_code == 200


def test_timeseries_single_pixel(client):
    # pixel (5, 126): east edge, clear of every event rectangle
    lon = 139.0 + 126.5 * 0.002
    lat = 36.0 - 5.5 * 0.002
    eps = 0.0008
    ring = [
        [lon - eps, lat - eps],
        [lon + eps, lat - eps],
        [lon + eps, lat + eps],
        [lon - eps, lat + eps],
    ]
    res = client.post("/analysis/timeseries", json={"polygon": ring})
    assert res.status_code == 200
    samples = res.json()["samples"]
    assert len(samples) == 12
    assert all(s["count"] == 1 for s in samples)
    # background pixel of a noise-free catalog
    assert all(s["mean"] == -12.0 for s in samples)


def test_timeseries_step_at_onset(client):
    ring = [
        [CONSTRUCT.west + 0.01, CONSTRUCT.south + 0.01],
        [CONSTRUCT.east - 0.01, CONSTRUCT.south + 0.01],
        [CONSTRUCT.east - 0.01, CONSTRUCT.north - 0.01],
        [CONSTRUCT.west + 0.01, CONSTRUCT.north - 0.01],
    ]
    res = client.post("/analysis/timeseries", json={"polygon": ring, "sensor": "SAR"})
    samples = res.json()["samples"]
    before = [s["mean"] for s in samples if s["timestamp"] < "2021-01-28"]
    after = [s["mean"] for s in samples if s["timestamp"] >= "2021-01-28"]
    assert before and after
    assert all(m == -12.0 for m in before)
    assert all(m == -6.0 for m in after)


def test_timeseries_two_vertex_polygon_is_422(client):
    res = client.post("/analysis/timeseries", json={"polygon": [[139.0, 35.9], [139.1, 35.9]]})
    assert res.status_code == 422


def test_pumice_analysis(client, synth_root):
    _, truth = synth_root
    raft_mask = truth.events[2].mask
    cat_scene_clouds = truth.clouds
    # calibrate on visible raft and open sea pixels
    rng = np.random.default_rng(8)
    scene_id = "optical-20210131T000000"
    cloud = cat_scene_clouds[scene_id]
    visible = raft_mask & ~cloud
    sea = ~raft_mask & ~cloud
    sea[100:, :] = False  # stay off the land strip
    p_cells = np.argwhere(visible)
    s_cells = np.argwhere(sea)
    calib = {
        "pumice": cells_to_lonlat(GRID, p_cells[rng.choice(len(p_cells), min(100, len(p_cells)), replace=False)]),
        "non_pumice": cells_to_lonlat(GRID, s_cells[rng.choice(len(s_cells), 100, replace=False)]),
    }
    res = client.post("/analysis/pumice", json={"date": "2021-02-01", "calibration": calib})
    assert res.status_code == 200
    body = res.json()
    assert "threshold" in body and body["scene_id"] == scene_id
    # tiles for the pumice layer render the raft in the pumice style
    key = lonlat_to_tile(139.17, 35.83, 13)
    tile = client.get(f"/tiles/{body['layer_id']}/{key.z}/{key.x}/{key.y}.png")
    img = np.asarray(Image.open(io.BytesIO(tile.content)))
    assert ((img == np.array([255, 0, 0, 200], np.uint8)).all(axis=-1)).any()


def test_pumice_no_optical_scene_is_404(tmp_path):
    from conftest import build_catalog, sar_raster

    root = tmp_path / "saronly"
    build_catalog(root, [(Sensor.SAR, utc(2021, 1, 1), sar_raster())])
    client = TestClient(create_app(root))
    res = client.post(
        "/analysis/pumice",
        json={"date": "2021-01-01", "calibration": {"pumice": [[139.05, 35.95]], "non_pumice": [[139.1, 35.9]]}},
    )
    assert res.status_code == 404


def test_layer_cache_eviction(synth_root):
    root, truth = synth_root
    client = TestClient(create_app(root, cache_layers=1))
    a = client.post("/layers", json={"kind": "sar_intensity", "date": "2021-01-15"})
    key = lonlat_to_tile(139.1, 35.9, 11)
    assert client.get(f"/tiles/{a.json()['layer_id']}/{key.z}/{key.x}/{key.y}.png").status_code == 200
    b = client.post("/layers", json={"kind": "rgb_composite", "date": "2021-01-15"})
    # the first layer was evicted by the second
    assert client.get(f"/tiles/{a.json()['layer_id']}/{key.z}/{key.x}/{key.y}.png").status_code == 404
    assert client.get(f"/tiles/{b.json()['layer_id']}/{key.z}/{key.x}/{key.y}.png").status_code == 200
