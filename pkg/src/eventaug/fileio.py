"""Event stream codecs: ATIS ``.bin``, CSV and the native ``EVT1`` container.

ATIS ``.bin`` (N-MNIST / N-Caltech101 distribution format), 40 bits per event,
big-endian::

    byte0      x
    byte1      y
    byte2[7]   polarity (1 -> +1, 0 -> -1)
    byte2[6:0] ++ byte3 ++ byte4   timestamp, 23 bits, microseconds

CSV has a header row naming the columns ``t``, ``x``, ``y``, ``p`` in any order;
polarity is written as 1/-1 and read as 1/-1 or 1/0.

Native ``EVT1``: magic, little-endian ``u16 width, u16 height, u64 count``,
then ``count`` packed records ``(u16 y, u16 x, u64 t, i8 p)``.
"""
from __future__ import annotations

import csv
import io
import os
import struct
from enum import Enum

import numpy as np

from .core import EventError, EventStream, SensorGeometry, canonicalize

FORMAT_VERSIONS = {"atis-bin": 1, "csv": 1, "evt": 1}

NATIVE_MAGIC = b"EVT1"
_NATIVE_HEADER = struct.Struct("<4sHHQ")
_NATIVE_RECORD = np.dtype([("y", "<u2"), ("x", "<u2"), ("t", "<u8"), ("p", "i1")])
ATIS_MAX_T = (1 << 23) - 1
CSV_COLUMNS = ("t", "x", "y", "p")


class DecodeError(EventError):
    pass


class EncodeRangeError(EventError):
    pass


class FormatTag(str, Enum):
    ATIS_BIN = "bin"
    CSV = "csv"
    NATIVE = "evt"

    @classmethod
    def from_path(cls, path) -> "FormatTag":
        ext = os.path.splitext(str(path))[1].lower().lstrip(".")
        try:
            return cls(ext)
        except ValueError:
            raise DecodeError(f"cannot infer event format from extension of {path!r}") from None

    @classmethod
    def parse(cls, name) -> "FormatTag":
        if isinstance(name, cls):
            return name
        aliases = {"bin": cls.ATIS_BIN, "atis": cls.ATIS_BIN, "atisbin": cls.ATIS_BIN,
                   "csv": cls.CSV, "evt": cls.NATIVE, "native": cls.NATIVE}
        try:
            return aliases[str(name).lower()]
        except KeyError:
            raise DecodeError(f"unknown format {name!r}") from None


# --- decoding ------------------------------------------------------------------

def _atis_columns(data: bytes):
    if len(data) % 5:
        raise DecodeError(f"truncated ATIS record: {len(data)} bytes is not a multiple of 5")
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 5).astype(np.int64)
    x = raw[:, 0]
    y = raw[:, 1]
    p = np.where(raw[:, 2] >> 7, 1, -1).astype(np.int8)
    t = ((raw[:, 2] & 0x7F) << 16) | (raw[:, 3] << 8) | raw[:, 4]
    return y, x, t, p


def _csv_columns(data: bytes):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DecodeError(f"CSV input is not UTF-8 text: {e}") from None
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DecodeError("CSV input has no header row")
    header = [c.strip().lower() for c in rows[0]]
    if sorted(header) != sorted(CSV_COLUMNS):
        raise DecodeError(f"CSV header must name columns t, x, y, p; got {rows[0]}")
    col = {name: i for i, name in enumerate(header)}
    n = len(rows) - 1
    vals = np.empty((n, 4), dtype=np.int64)
    for k, row in enumerate(rows[1:]):
        line = k + 2
        if len(row) != 4:
            raise DecodeError(f"CSV line {line}: expected 4 fields, got {len(row)}")
        try:
            vals[k] = [int(row[col[c]].strip()) for c in ("y", "x", "t", "p")]
        except ValueError:
            raise DecodeError(f"CSV line {line}: non-integer field in {row}") from None
    p = vals[:, 3]
    bad = np.flatnonzero((p != 1) & (p != 0) & (p != -1))
    if bad.size:
        raise DecodeError(f"CSV line {bad[0] + 2}: polarity {p[bad[0]]} is not one of 1, 0, -1")
    p = np.where(p == 1, 1, -1).astype(np.int8)
    return vals[:, 0], vals[:, 1], vals[:, 2], p


def _native_columns(data: bytes):
    if len(data) < _NATIVE_HEADER.size:
        raise DecodeError("truncated EVT1 header")
    magic, width, height, count = _NATIVE_HEADER.unpack_from(data)
    if magic != NATIVE_MAGIC:
        raise DecodeError(f"bad magic {magic!r}, expected {NATIVE_MAGIC!r}")
    body = data[_NATIVE_HEADER.size:]
    expected = count * _NATIVE_RECORD.itemsize
    if len(body) != expected:
        raise DecodeError(f"EVT1 header declares {count} records ({expected} bytes) but body has {len(body)} bytes")
    rec = np.frombuffer(body, dtype=_NATIVE_RECORD)
    p = rec["p"]
    bad = np.flatnonzero((p != 1) & (p != -1))
    if bad.size:
        raise DecodeError(f"EVT1 record {bad[0]}: polarity {p[bad[0]]} is not +1 or -1")
    t = rec["t"]
    if t.size and int(t.max()) > np.iinfo(np.int64).max:
        raise DecodeError("EVT1 timestamp exceeds the signed 64-bit range")
    cols = (rec["y"].astype(np.int64), rec["x"].astype(np.int64), t.astype(np.int64), p.astype(np.int8))
    return cols, SensorGeometry(width, height)


def decode_columns(data: bytes, fmt) -> tuple[tuple, SensorGeometry | None]:
    """Raw ``(y, x, t, p)`` columns, unsorted and unchecked, plus the geometry if the format stores one."""
    fmt = FormatTag.parse(fmt)
    if fmt is FormatTag.ATIS_BIN:
        return _atis_columns(data), None
    if fmt is FormatTag.CSV:
        return _csv_columns(data), None
    return _native_columns(data)


def infer_geometry(cols) -> SensorGeometry:
    """Smallest sensor holding every event (1x1 for an empty stream)."""
    y, x = cols[0], cols[1]
    if len(y) == 0:
        return SensorGeometry(1, 1)
    return SensorGeometry(int(x.max()) + 1, int(y.max()) + 1)


def decode(data: bytes, fmt, geometry: SensorGeometry | None = None) -> EventStream:
    """Decode ``data`` into a canonical stream.

    ATIS and CSV files do not store the sensor size: pass ``geometry``, or
    leave it ``None`` to use the bounding box of the coordinates. The native
    container carries its own geometry and a conflicting argument is an error.
    Out-of-bounds events raise :class:`DecodeError` rather than being dropped.
    """
    cols, stored = decode_columns(data, fmt)
    if stored is not None:
        if geometry is not None and geometry != stored:
            raise DecodeError(f"EVT1 geometry {stored.width}x{stored.height} conflicts with "
                              f"requested {geometry.width}x{geometry.height}")
        geometry = stored
    elif geometry is None:
        geometry = infer_geometry(cols)
    try:
        return canonicalize(EventStream(*cols, geometry))
    except EventError as e:
        raise DecodeError(str(e)) from None


# --- encoding ------------------------------------------------------------------

def _range_check(stream: EventStream, field: str, hi: int) -> None:
    col = getattr(stream, field)
    bad = np.flatnonzero((col < 0) | (col > hi))
    if bad.size:
        i = int(bad[0])
        raise EncodeRangeError(f"field {field} of event {i} is {col[i]}, outside [0, {hi}]")


def _encode_atis(stream: EventStream) -> bytes:
    for field, hi in (("x", 255), ("y", 255), ("t", ATIS_MAX_T)):
        _range_check(stream, field, hi)
    out = np.empty((len(stream), 5), dtype=np.uint8)
    t = stream.t
    out[:, 0] = stream.x
    out[:, 1] = stream.y
    out[:, 2] = ((stream.p > 0).astype(np.int64) << 7) | (t >> 16)
    out[:, 3] = (t >> 8) & 0xFF
    out[:, 4] = t & 0xFF
    return out.tobytes()


def _encode_csv(stream: EventStream) -> bytes:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for y, x, t, p in stream:
        buf.write(f"{t},{x},{y},{p}\n")
    return buf.getvalue().encode("utf-8")


def _encode_native(stream: EventStream) -> bytes:
    g = stream.geometry
    if g.width > 0xFFFF or g.height > 0xFFFF:
        raise EncodeRangeError(f"geometry {g.width}x{g.height} exceeds the u16 range of EVT1")
    _range_check(stream, "y", 0xFFFF)
    _range_check(stream, "x", 0xFFFF)
    _range_check(stream, "t", np.iinfo(np.int64).max)
    rec = np.empty(len(stream), dtype=_NATIVE_RECORD)
    rec["y"], rec["x"], rec["t"], rec["p"] = stream.y, stream.x, stream.t, stream.p
    return _NATIVE_HEADER.pack(NATIVE_MAGIC, g.width, g.height, len(stream)) + rec.tobytes()


def encode(stream: EventStream, fmt) -> bytes:
    fmt = FormatTag.parse(fmt)
    if fmt is FormatTag.ATIS_BIN:
        return _encode_atis(stream)
    if fmt is FormatTag.CSV:
        return _encode_csv(stream)
    return _encode_native(stream)


def read_events(path, fmt=None, geometry: SensorGeometry | None = None) -> EventStream:
    fmt = FormatTag.from_path(path) if fmt is None else FormatTag.parse(fmt)
    with open(path, "rb") as f:
        return decode(f.read(), fmt, geometry)


def write_events(path, stream: EventStream, fmt=None) -> None:
    fmt = FormatTag.from_path(path) if fmt is None else FormatTag.parse(fmt)
    data = encode(stream, fmt)
    with open(path, "wb") as f:
        f.write(data)
