"""Tile rendering: masks and composites to RGBA PNG bytes."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .raster import TILE_SIZE, Raster

BLUE_RGBA = (0, 0, 255, 180)
RED_RGBA = (255, 0, 0, 180)
PUMICE_RGBA = (255, 0, 0, 200)
DEFAULT_RGB_STRETCH = (0.0, 0.3)
DEFAULT_SAR_STRETCH = (-25.0, 0.0)


def transparent_tile(size: int = TILE_SIZE) -> np.ndarray:
    return np.zeros((size, size, 4), dtype=np.uint8)


def render_change(tile: Raster) -> np.ndarray:
    """Blue/red overlay from 0/1 'blue' and 'red' bands; transparent elsewhere."""
    out = transparent_tile(tile.grid.width)
    blue = (tile.band("blue") > 0.5) & tile.valid
    red = (tile.band("red") > 0.5) & tile.valid
    out[blue] = BLUE_RGBA
    out[red] = RED_RGBA
    return out


def render_pumice(tile: Raster) -> np.ndarray:
    out = transparent_tile(tile.grid.width)
    out[(tile.band("pumice") > 0.5) & tile.valid] = PUMICE_RGBA
    return out


def _stretch(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    scaled = (values.astype(np.float64) - lo) / (hi - lo) * 255.0
    return np.clip(scaled, 0.0, 255.0).astype(np.uint8)


def render_rgb(tile: Raster, stretch: tuple[float, float] = DEFAULT_RGB_STRETCH) -> np.ndarray:
    """True-color composite with a linear reflectance stretch."""
    lo, hi = stretch
    out = transparent_tile(tile.grid.width)
    for i, name in enumerate(("red", "green", "blue")):
        out[:, :, i] = _stretch(tile.band(name), lo, hi)
    out[:, :, 3] = np.where(tile.valid, 255, 0)
    out[~tile.valid] = 0
    return out


def render_sar(tile: Raster, stretch: tuple[float, float] = DEFAULT_SAR_STRETCH) -> np.ndarray:
    """Grayscale backscatter with a linear dB stretch."""
    lo, hi = stretch
    gray = _stretch(tile.band("vv"), lo, hi)
    out = transparent_tile(tile.grid.width)
    for i in range(3):
        out[:, :, i] = gray
    out[:, :, 3] = np.where(tile.valid, 255, 0)
    out[~tile.valid] = 0
    return out


def png_bytes(rgba: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgba, "RGBA").save(buf, format="PNG")
    return buf.getvalue()
