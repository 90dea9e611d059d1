"""Dense rasterizations of event streams and a distance between them.

Channel order for the two-polarity rasters is ``[positive, negative]``.
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

from .core import EventError, EventStream, SensorGeometry, canonicalize

KINDS = ("frame", "count", "voxel")
RASTER_MAGIC = b"RAS1"
DISTANCE_EPS = 1e-12


class RasterError(EventError):
    pass


@dataclass(frozen=True, eq=False)
class Raster:
    kind: str
    values: np.ndarray  # (channels or bins, height, width)
    geometry: SensorGeometry | None = None
    time_span: tuple[int, int] | None = None

    @property
    def dims(self) -> tuple[int, int, int]:
        return tuple(self.values.shape)

    def __eq__(self, other):
        if not isinstance(other, Raster):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.values, other.values)

    __hash__ = None

    def to_bytes(self) -> bytes:
        """``RAS1`` + three little-endian u32 dims + row-major float32 values."""
        c, h, w = self.dims
        return RASTER_MAGIC + struct.pack("<3I", c, h, w) + self.values.astype("<f4").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, kind: str = "count") -> "Raster":
        if len(data) < 16 or data[:4] != RASTER_MAGIC:
            raise RasterError("not a RAS1 raster")
        c, h, w = struct.unpack_from("<3I", data, 4)
        body = data[16:]
        if len(body) != 4 * c * h * w:
            raise RasterError(f"RAS1 body has {len(body)} bytes, expected {4 * c * h * w}")
        vals = np.frombuffer(body, dtype="<f4").reshape(c, h, w).astype(np.float64)
        return cls(kind, vals, SensorGeometry(w, h) if h and w else None)

    def to_text(self) -> str:
        """Whitespace grid: a ``# kind C H W`` header, then each channel as H rows, blank line between."""
        c, h, w = self.dims
        buf = io.StringIO()
        buf.write(f"# {self.kind} {c} {h} {w}\n")
        for k in range(c):
            if k:
                buf.write("\n")
            for row in self.values[k]:
                buf.write(" ".join(f"{v:.9g}" for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "Raster":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise RasterError("text raster must start with a '# kind C H W' header")
        try:
            kind, c, h, w = lines[0][1:].split()
            c, h, w = int(c), int(h), int(w)
        except ValueError:
            raise RasterError(f"bad text raster header {lines[0]!r}") from None
        rows = [ln.split() for ln in lines[1:] if ln.strip()]
        try:
            vals = np.array(rows, dtype=np.float64)
        except ValueError:
            raise RasterError("text raster rows are ragged or non-numeric") from None
        if vals.size != c * h * w:
            raise RasterError(f"text raster has {vals.size} values, header says {c * h * w}")
        return cls(kind, vals.reshape(c, h, w))


def _pixel_index(stream: EventStream) -> np.ndarray:
    return stream.y * stream.geometry.width + stream.x


def event_count(stream: EventStream) -> Raster:
    """Per-pixel, per-polarity event counts."""
    g = stream.geometry
    npix = g.height * g.width
    idx = _pixel_index(stream) + np.where(stream.p > 0, 0, npix)
    counts = np.bincount(idx, minlength=2 * npix).astype(np.float64)
    return Raster("count", counts.reshape(2, g.height, g.width), g, stream.time_span)


def event_frame(stream: EventStream) -> Raster:
    """Binary occupancy: 1 where a pixel saw at least one event of that polarity."""
    c = event_count(stream)
    return Raster("frame", (c.values > 0).astype(np.float64), c.geometry, c.time_span)


def voxel_grid(stream: EventStream, bins: int, signed: bool = True) -> Raster:
    """Bilinear temporal binning into ``bins`` slices.

    Each event's normalized time ``t* = (bins - 1)(t - t_min) / (t_max - t_min)``
    is split between the two nearest bins with weights ``1 - |b - t*|``. In the
    signed (default) variant weights are multiplied by polarity in one stack of
    ``bins`` slices; otherwise positive and negative events fill separate stacks
    (``2 * bins`` slices, positive first) with unit mass per event.
    """
    bins = int(bins)
    if bins < 1:
        raise RasterError(f"voxel grid needs at least one bin, got {bins}")
    g = stream.geometry
    npix = g.height * g.width
    stacks = 1 if signed else 2
    out = np.zeros(stacks * bins * npix)
    if len(stream):
        # float accumulation order must not depend on input order
        stream = canonicalize(stream)
        t = stream.t.astype(np.float64)
        t0, t1 = t.min(), t.max()
        ts = (bins - 1) * (t - t0) / (t1 - t0) if t1 > t0 else np.zeros_like(t)
        lo = np.floor(ts).astype(np.int64)
        frac = ts - lo
        pix = _pixel_index(stream)
        if signed:
            mass = stream.p.astype(np.float64)
            base = pix
        else:
            mass = np.ones(len(stream))
            base = pix + np.where(stream.p > 0, 0, bins * npix)
        for b, w in ((lo, 1.0 - frac), (lo + 1, frac)):
            ok = (b < bins) & (w > 0)
            out += np.bincount(base[ok] + b[ok] * npix, weights=(mass * w)[ok], minlength=out.size)
    return Raster("voxel", out.reshape(stacks * bins, g.height, g.width), g, stream.time_span)


def rasterize(stream: EventStream, kind: str, bins: int = 5) -> Raster:
    if kind == "frame":
        return event_frame(stream)
    if kind == "count":
        return event_count(stream)
    if kind == "voxel":
        return voxel_grid(stream, bins)
    raise RasterError(f"unknown representation {kind!r}; choose from {', '.join(KINDS)}")


def raster_distance(a: Raster, b: Raster) -> float:
    """``|a - b| / (|a| + |b| + eps)`` in the L2 norm; 0 for identical rasters, at most 1."""
    if a.kind != b.kind or a.dims != b.dims:
        raise RasterError(f"cannot compare {a.kind}{a.dims} with {b.kind}{b.dims}")
    va, vb = a.values.ravel(), b.values.ravel()
    return float(np.linalg.norm(va - vb) / (np.linalg.norm(va) + np.linalg.norm(vb) + DISTANCE_EPS))
