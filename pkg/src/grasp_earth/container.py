"""Reader/writer for the GRSP raster container.

Layout, all little-endian:

    "GRSP"                      4 bytes magic
    version                     u16, currently 1
    origin_lon, origin_lat      2 x f64
    pixel_size                  f64
    width, height               2 x u32
    band_count                  u16
    per band:
        name length             u16
        name                    UTF-8 bytes
        data                    width*height f32, row-major
    validity plane              width*height bytes, 0 or 1

The round trip is bit-exact: every band payload and the mask are preserved
byte for byte, including NaNs and band order.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .errors import FormatViolation, IoFailure
from .raster import GridSpec, Raster

MAGIC = b"GRSP"
VERSION = 1
_HEADER = struct.Struct("<ddd II H")  # grid + band count, after magic/version


class _Cursor:
    """Sequential reader that reports the byte offset of any violation."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatViolation(
                f"truncated file: need {n} bytes for {what}, have {len(self.data) - self.pos}",
                self.pos,
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u16(self, what: str) -> int:
        return struct.unpack("<H", self.take(2, what))[0]


def write_container(raster: Raster, path: str | Path) -> None:
    """Serialize a raster to the GRSP format, atomically replacing path."""
    parts = [MAGIC, struct.pack("<H", VERSION)]
    g = raster.grid
    parts.append(_HEADER.pack(g.origin_lon, g.origin_lat, g.pixel_size, g.width, g.height, len(raster.bands)))
    for name, data in raster.bands.items():
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"band name too long: {name!r}")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(np.ascontiguousarray(data, dtype="<f4").tobytes())
    parts.append(raster.valid.astype(np.uint8).tobytes())
    blob = b"".join(parts)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".grsp.tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_container(path: str | Path) -> Raster:
    """Parse a GRSP file back into a Raster.

    Raises FormatViolation (with the offending byte offset) on bad magic,
    unknown version, truncation, duplicate band names or non-0/1 mask bytes,
    and IoFailure when the file cannot be read at all.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return parse_container(data)


def parse_container(data: bytes) -> Raster:
    cur = _Cursor(data)
    if cur.take(4, "magic") != MAGIC:
        raise FormatViolation("bad magic, expected b'GRSP'", 0)
    version = cur.u16("version")
    if version != VERSION:
        raise FormatViolation(f"unsupported version {version}", 4)
    grid_offset = cur.pos
    origin_lon, origin_lat, pixel_size, width, height, band_count = _HEADER.unpack(
        cur.take(_HEADER.size, "grid header")
    )
    try:
        grid = GridSpec(origin_lon, origin_lat, pixel_size, width, height)
    except Exception as exc:
        raise FormatViolation(f"invalid grid: {exc}", grid_offset) from exc
    if band_count == 0:
        raise FormatViolation("band count is zero", grid_offset + _HEADER.size - 2)

    plane = width * height
    bands: dict[str, np.ndarray] = {}
    for _ in range(band_count):
        name_offset = cur.pos
        name_len = cur.u16("band name length")
        raw = cur.take(name_len, "band name")
        try:
            name = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatViolation(f"band name is not UTF-8: {exc}", name_offset + 2) from exc
        if name in bands:
            raise FormatViolation(f"duplicate band name {name!r}", name_offset)
        payload = cur.take(plane * 4, f"band {name!r} data")
        bands[name] = np.frombuffer(payload, dtype="<f4").reshape(height, width).copy()

    mask_offset = cur.pos
    mask_raw = np.frombuffer(cur.take(plane, "validity plane"), dtype=np.uint8)
    bad = np.nonzero(mask_raw > 1)[0]
    if bad.size:
        raise FormatViolation(
            f"validity byte {mask_raw[bad[0]]} is not 0/1", mask_offset + int(bad[0])
        )
    if cur.pos != len(data):
        raise FormatViolation(
            f"{len(data) - cur.pos} trailing bytes after validity plane", cur.pos
        )
    valid = mask_raw.astype(bool).reshape(height, width)
    return Raster(grid, bands, valid)
