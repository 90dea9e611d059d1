"""Event and stream types, validation, canonical ordering, time normalization.

Streams are stored column-wise (``y``, ``x``, ``t``, ``p`` as numpy arrays) so the
transforms can work on millions of events without a Python loop. Row/column
order follows the event matrix layout ``[y, x, t, 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class EventError(ValueError):
    """Base class for input-domain errors raised by this package."""


class InputDomainError(EventError):
    pass


class EmptyInputError(EventError):
    pass


class Event(NamedTuple):
    y: int
    x: int
    t: int
    p: int


@dataclass(frozen=True)
class SensorGeometry:
    width: int
    height: int

    def __post_init__(self):
        if int(self.width) < 1 or int(self.height) < 1:
            raise InputDomainError(f"geometry must be at least 1x1, got {self.width}x{self.height}")
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width), the numpy raster shape."""
        return (self.height, self.width)


def _frozen(a, dtype) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=dtype)
    if a.base is not None or a.flags.writeable:
        a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class EventStream:
    """Immutable column store of events plus the sensor geometry.

    Construction does not sort or check bounds; use :func:`canonicalize` to get a
    stream that satisfies the canonical invariants, and :func:`validate` to audit one.
    """

    y: np.ndarray
    x: np.ndarray
    t: np.ndarray
    p: np.ndarray
    geometry: SensorGeometry = field(default=None)

    def __post_init__(self):
        if self.geometry is None:
            raise InputDomainError("EventStream requires a geometry")
        cols = {
            "y": _frozen(self.y, np.int64),
            "x": _frozen(self.x, np.int64),
            "t": _frozen(self.t, np.int64),
            "p": _frozen(self.p, np.int8),
        }
        n = {len(v) for v in cols.values()}
        if len(n) != 1:
            raise InputDomainError(f"column lengths differ: { {k: len(v) for k, v in cols.items()} }")
        for k, v in cols.items():
            if v.ndim != 1:
                raise InputDomainError(f"column {k} must be one-dimensional")
            object.__setattr__(self, k, v)

    @classmethod
    def empty(cls, geometry: SensorGeometry) -> "EventStream":
        z = np.zeros(0, np.int64)
        return cls(z, z, z, np.zeros(0, np.int8), geometry)

    @classmethod
    def from_events(cls, events: Iterable[Sequence[int]], geometry: SensorGeometry) -> "EventStream":
        """Build an (unsorted, unchecked) stream from ``(y, x, t, p)`` tuples."""
        arr = np.array([tuple(e) for e in events], dtype=np.int64).reshape(-1, 4)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], geometry)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def count(self) -> int:
        return len(self.t)

    def __iter__(self):
        for row in zip(self.y.tolist(), self.x.tolist(), self.t.tolist(), self.p.tolist()):
            yield Event(*row)

    def __getitem__(self, i) -> Event:
        return Event(int(self.y[i]), int(self.x[i]), int(self.t[i]), int(self.p[i]))

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.p, other.p)
        )

    __hash__ = None

    def __repr__(self):
        g = self.geometry
        return f"EventStream(n={len(self)}, geometry={g.width}x{g.height}, span={self.time_span})"

    @property
    def time_span(self) -> tuple[int, int] | None:
        if len(self) == 0:
            return None
        return int(self.t.min()), int(self.t.max())

    def matrix(self) -> np.ndarray:
        """The homogeneous event matrix, one row ``[y, x, t, 1]`` per event."""
        m = np.ones((len(self), 4), dtype=np.float64)
        m[:, 0] = self.y
        m[:, 1] = self.x
        m[:, 2] = self.t
        return m

    def replace(self, **cols) -> "EventStream":
        kw = dict(y=self.y, x=self.x, t=self.t, p=self.p, geometry=self.geometry)
        kw.update(cols)
        return EventStream(**kw)


@dataclass(frozen=True)
class Violation:
    kind: str  # "out_of_bounds" | "unsorted" | "bad_polarity" | "negative_time"
    index: int
    detail: str = ""


def _first(mask: np.ndarray) -> int | None:
    idx = np.flatnonzero(mask)
    return int(idx[0]) if idx.size else None


def _sorted(stream: EventStream) -> EventStream:
    g = stream.geometry
    t0 = int(stream.t.min())
    span = int(stream.t.max()) - t0 + 1
    cell = 2 * g.height * g.width
    if span * cell < 2**62:
        # (t, y, x, p) packed into one int64; sorting it sorts lexicographically
        key = (stream.t - t0) * cell + (stream.y * g.width + stream.x) * 2 + (stream.p > 0)
        key.sort()
        t, rest = np.divmod(key, cell)
        pix, pbit = np.divmod(rest, 2)
        y, x = np.divmod(pix, g.width)
        return EventStream(y, x, t + t0, np.where(pbit == 1, 1, -1).astype(np.int8), g)
    order = np.lexsort((stream.p, stream.x, stream.y, stream.t))
    return EventStream(stream.y[order], stream.x[order], stream.t[order], stream.p[order], g)


def validate(stream: EventStream) -> list[Violation]:
    """Audit the canonical-stream invariants.

    Returns one :class:`Violation` per violated class, located at the first
    offending index. An empty list means the stream is canonical.
    """
    out: list[Violation] = []
    if len(stream) == 0:
        return out
    g = stream.geometry
    y, x, t, p = stream.y, stream.x, stream.t, stream.p
    i = _first((y < 0) | (y >= g.height) | (x < 0) | (x >= g.width))
    if i is not None:
        out.append(Violation("out_of_bounds", i, f"(y={y[i]}, x={x[i]}) outside {g.width}x{g.height}"))
    i = _first((p != 1) & (p != -1))
    if i is not None:
        out.append(Violation("bad_polarity", i, f"p={p[i]}"))
    i = _first(t < 0)
    if i is not None:
        out.append(Violation("negative_time", i, f"t={t[i]}"))
    if len(stream) > 1:
        i = _first(_unsorted_mask(stream))
        if i is not None:
            out.append(Violation("unsorted", i + 1, f"event {i + 1} precedes event {i} in (t, y, x, p) order"))
    return out


def _check_domain(y, x, t, p, geometry: SensorGeometry) -> None:
    i = _first((y < 0) | (y >= geometry.height) | (x < 0) | (x >= geometry.width))
    if i is not None:
        raise InputDomainError(
            f"event {i} at (y={y[i]}, x={x[i]}) is outside the {geometry.width}x{geometry.height} sensor"
        )
    i = _first((p != 1) & (p != -1))
    if i is not None:
        raise InputDomainError(f"event {i} has polarity {p[i]}, expected +1 or -1")
    i = _first(t < 0)
    if i is not None:
        raise InputDomainError(f"event {i} has negative timestamp {t[i]}")


def canonicalize(events, geometry: SensorGeometry | None = None) -> EventStream:
    """Sort events by ``(t, y, x, p)`` after checking bounds and polarity.

    ``events`` may be an :class:`EventStream` (its geometry is used unless one is
    given) or any iterable of ``(y, x, t, p)`` tuples.
    """
    if isinstance(events, EventStream):
        s = events if geometry is None else events.replace(geometry=geometry)
    else:
        if geometry is None:
            raise InputDomainError("geometry is required when canonicalizing raw events")
        s = EventStream.from_events(events, geometry)
    _check_domain(s.y, s.x, s.t, s.p, s.geometry)
    if len(s) < 2:
        return s
    # fast path: already canonical
    if not _needs_sort(s):
        return s
    return _sorted(s)


def _unsorted_mask(stream: EventStream) -> np.ndarray:
    """``mask[i]`` is True when event ``i + 1`` sorts before event ``i`` in ``(t, y, x, p)``."""
    dt = np.diff(stream.t)
    dy, dx = np.diff(stream.y), np.diff(stream.x)
    dp = np.diff(stream.p.astype(np.int64))
    return (dt < 0) | ((dt == 0) & ((dy < 0) | ((dy == 0) & ((dx < 0) | ((dx == 0) & (dp < 0))))))


def _needs_sort(stream: EventStream) -> bool:
    return len(stream) > 1 and bool(_unsorted_mask(stream).any())


def normalize_time(stream: EventStream) -> EventStream:
    """Shift timestamps so the earliest event is at ``t = 0``."""
    if len(stream) == 0:
        raise EmptyInputError("cannot normalize the time of an empty stream")
    return stream.replace(t=stream.t - stream.t.min())
