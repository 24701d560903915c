"""Batch front door: synth, ingest, composites, change, pumice, timeseries, serve.

Every subcommand delegates to the engine; exit code 0 on success, 1 on a
domain error (with one machine-readable ``ERROR <code>: <message>`` line on
stderr), 2 on usage errors.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import engine, synth
from .catalog import Catalog, Sensor, format_timestamp, ingest as catalog_ingest
from .container import write_container
from .errors import GraspError, NoScenesInWindow
from .raster import BoundingBox, Raster


def _domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except GraspError as exc:
            click.echo(f"ERROR {exc.code}: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _parse_bbox(value: str | None, catalog: Catalog | None = None) -> BoundingBox:
    if value:
        try:
            west, south, east, north = (float(p) for p in value.split(","))
        except ValueError:
            raise click.UsageError("--bbox expects WEST,SOUTH,EAST,NORTH") from None
        return BoundingBox(west, south, east, north)
    extent = catalog.extent if catalog else None
    if extent is None:
        raise NoScenesInWindow("catalog is empty and no --bbox given")
    return extent


def _mask_raster(grid, name: str, mask: np.ndarray) -> Raster:
    return Raster(grid, {name: mask.astype(np.float32)})


@click.group()
def main():
    """Satellite change detection over a local scene catalog."""


@main.command("synth")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@_domain_errors
def synth_cmd(config_path: str, out_dir: str):
    """Generate a synthetic catalog with ground truth."""
    config = synth.SynthConfig.from_json(json.loads(Path(config_path).read_text()))
    truth = synth.generate(config, out_dir)
    click.echo(f"catalog written to {out_dir}: {config.count} scenes per sensor, "
               f"{len(truth.events)} events")


@main.command("ingest")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", "catalog_dir", required=True, type=click.Path(file_okay=False))
@click.option("--sensor", required=True, type=click.Choice([s.value for s in Sensor]))
@click.option("--date", required=True)
@_domain_errors
def ingest_cmd(file: str, catalog_dir: str, sensor: str, date: str):
    """Register a GRSP container as a scene."""
    scene_id = catalog_ingest(catalog_dir, file, sensor, date)
    click.echo(scene_id)


@main.command("composite")
@click.option("--catalog", "catalog_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--sensor", required=True, type=click.Choice([s.value for s in Sensor]))
@click.option("--date", required=True)
@click.option("--window-days", type=int, default=None)
@click.option("--bbox", default=None, help="WEST,SOUTH,EAST,NORTH (default: catalog extent)")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_domain_errors
def composite_cmd(catalog_dir, sensor, date, window_days, bbox, out_path):
    """Temporal median composite around a date."""
    cat = Catalog.open(catalog_dir)
    result = engine.temporal_composite(cat, sensor, date, _parse_bbox(bbox, cat), window_days)
    write_container(result, out_path)
    click.echo(f"{out_path}: bands {', '.join(result.band_names)}")


@main.command("change")
@click.option("--catalog", "catalog_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--date1", required=True)
@click.option("--date2", required=True)
@click.option("--calib", "calib_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--window-days", type=int, default=12)
@click.option("--bbox", default=None)
@click.option("--out-prefix", required=True)
@_domain_errors
def change_cmd(catalog_dir, date1, date2, calib_path, window_days, bbox, out_prefix):
    """Blue/red SAR change masks between two dates."""
    cat = Catalog.open(catalog_dir)
    calib = engine.load_sar_calibration(calib_path)
    layer = engine.sar_change(cat, date1, date2, calib, _parse_bbox(bbox, cat), window_days)
    blue_path = f"{out_prefix}_blue.grsp"
    red_path = f"{out_prefix}_red.grsp"
    write_container(_mask_raster(layer.grid, "blue", layer.blue_mask), blue_path)
    write_container(_mask_raster(layer.grid, "red", layer.red_mask), red_path)
    click.echo(
        f"thresholds: blue={layer.thresholds.blue:.4f} dB red={layer.thresholds.red:.4f} dB"
    )
    click.echo(f"{blue_path}: {int(layer.blue_mask.sum())} px")
    click.echo(f"{red_path}: {int(layer.red_mask.sum())} px")


@main.command("pumice")
@click.option("--catalog", "catalog_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--date", required=True)
@click.option("--calib", "calib_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--bbox", default=None)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_domain_errors
def pumice_cmd(catalog_dir, date, calib_path, bbox, out_path):
    """Pumice-raft mask from the scene nearest a date."""
    cat = Catalog.open(catalog_dir)
    calib = engine.load_pumice_calibration(calib_path)
    result = engine.detect_pumice(cat, date, calib, _parse_bbox(bbox, cat))
    write_container(_mask_raster(result.grid, "pumice", result.mask), out_path)
    click.echo(f"threshold: {result.threshold:.6f} (scene {result.scene_id})")
    click.echo(f"{out_path}: {int(result.mask.sum())} px")


@main.command("timeseries")
@click.option("--catalog", "catalog_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--polygon", "polygon_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--sensor", default="SAR", type=click.Choice([s.value for s in Sensor]))
@click.option("--band", default="vv")
@click.option("--start", default=None)
@click.option("--end", default=None)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@_domain_errors
def timeseries_cmd(catalog_dir, polygon_path, sensor, band, start, end, out_path):
    """Zonal mean time series over a polygon, written as CSV."""
    cat = Catalog.open(catalog_dir)
    poly = engine.load_polygon(polygon_path)
    date_range = (start, end) if start and end else None
    samples = engine.zonal_timeseries(cat, poly, sensor, band, date_range)
    lines = ["timestamp,mean_db,valid_pixels"]
    for s in samples:
        mean = "" if s.mean is None else repr(s.mean)
        lines.append(f"{format_timestamp(s.timestamp)},{mean},{s.count}")
    Path(out_path).write_text("\n".join(lines) + "\n")
    click.echo(f"{out_path}: {len(samples)} samples")


@main.command("serve")
@click.option(
    "--catalog",
    "catalog_dir",
    envvar="GRASP_CATALOG",
    default=None,
    help="Catalog directory (falls back to GRASP_CATALOG).",
)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8080)
@click.option("--cache-layers", type=int, default=64)
@click.option("--basemap-url", default=None)
@click.option("--viewer", "viewer_dist", default=None, type=click.Path(file_okay=False))
def serve_cmd(catalog_dir, host, port, cache_layers, basemap_url, viewer_dist):
    """Serve the tile/analysis HTTP API."""
    import uvicorn

    from .service import DEFAULT_BASEMAP, create_app

    app = create_app(
        catalog_dir,
        cache_layers=cache_layers,
        basemap_url=basemap_url or DEFAULT_BASEMAP,
        viewer_dist=viewer_dist,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
