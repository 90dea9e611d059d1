"""Spatiotemporal transforms of event streams.

All matrices act on homogeneous row vectors ``[y, x, t, 1]`` by right
multiplication, so a whole stream is transformed as ``M_events @ M``. The
fourth column of every matrix built here is ``(0, 0, 0, 1)``.

Units: ``y``/``x`` in pixels, ``t`` in microseconds, ``tau`` in microseconds per
pixel. With these units ``t / tau`` is a pixel quantity and ``tau * y`` a time
quantity, which is what the balanced rotation mixes.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .core import EmptyInputError, EventStream, InputDomainError, canonicalize

HALF_PI = math.pi / 2


class Plane(str, Enum):
    YT = "yt"
    XT = "xt"

    @property
    def axis(self) -> int:
        """Column of the spatial coordinate mixed with time."""
        return 0 if self is Plane.YT else 1


def as_plane(plane) -> Plane:
    try:
        return Plane(plane.lower() if isinstance(plane, str) else plane)
    except ValueError:
        raise InputDomainError(f"unknown plane {plane!r}, expected 'yt' or 'xt'") from None


def check_theta(theta: float, inclusive: bool = False) -> float:
    """Reject angles outside ``(-pi/2, pi/2)`` (``[-pi/2, pi/2]`` with ``inclusive``)."""
    theta = float(theta)
    bad = abs(theta) > HALF_PI if inclusive else abs(theta) >= HALF_PI
    if not math.isfinite(theta) or bad:
        raise InputDomainError(f"|theta| must be {'<=' if inclusive else '<'} pi/2, got {theta}")
    return theta


def check_tau(tau: float) -> float:
    tau = float(tau)
    if not math.isfinite(tau) or tau <= 0:
        raise InputDomainError(f"tau must be a positive finite number, got {tau}")
    return tau


@dataclass(frozen=True)
class VptParams:
    plane: Plane
    theta: float
    tau: float
    center_spatial: float
    center_time: float

    def __post_init__(self):
        object.__setattr__(self, "plane", as_plane(self.plane))
        # a rotation stays finite at +-pi/2, unlike the stretch
        object.__setattr__(self, "theta", check_theta(self.theta, inclusive=True))
        object.__setattr__(self, "tau", check_tau(self.tau))
        for name in ("center_spatial", "center_time"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InputDomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["plane"] = self.plane.value
        return d


@dataclass(frozen=True)
class TransformStats:
    input_count: int
    retained_count: int
    discarded_spatial: int = 0
    discarded_temporal: int = 0

    def __post_init__(self):
        if self.input_count != self.retained_count + self.discarded_spatial + self.discarded_temporal:
            raise AssertionError(f"event accounting does not balance: {self}")

    @property
    def spatial_discard_fraction(self) -> float:
        return self.discarded_spatial / self.input_count if self.input_count else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


# --- matrices -----------------------------------------------------------------

def translation_to_center(y_c: float, x_c: float, t_c: float) -> np.ndarray:
    """Matrix moving the point ``(y_c, x_c, t_c)`` to the origin."""
    m = np.eye(4)
    m[3, :3] = (-y_c, -x_c, -t_c)
    return m


def translation_back(y_c: float, x_c: float, t_c: float) -> np.ndarray:
    """Inverse of :func:`translation_to_center`."""
    m = np.eye(4)
    m[3, :3] = (y_c, x_c, t_c)
    return m


def balanced_rotation(plane, theta: float, tau: float) -> np.ndarray:
    """Rotation by ``theta`` in the (space, time) plane with time scaled by ``tau``.

    ``tau = 1`` gives the plain (unbalanced) rotation. The determinant is
    ``cos^2 + sin^2 = 1`` for any ``tau``.
    """
    plane = as_plane(plane)
    tau = check_tau(tau)
    theta = float(theta)
    c, s = math.cos(theta), math.sin(theta)
    a = plane.axis
    m = np.eye(4)
    m[a, a] = c
    m[a, 2] = tau * s
    m[2, a] = -s / tau
    m[2, 2] = c
    return m


def vpt_matrix(params: VptParams) -> np.ndarray:
    """Closed form of ``translation_to_center @ balanced_rotation @ translation_back``.

    For the YT plane the spatial center is ``y_c``, for XT it is ``x_c``; the other
    spatial coordinate passes through untouched. The translation row
    ``(-c_s cos + c_t sin / tau + c_s, -tau c_s sin - c_t cos + c_t)`` cancels
    badly for large centers, so it is summed exactly over the rotation entries
    and rounded once.
    """
    c, s = math.cos(params.theta), math.sin(params.theta)
    ts, s_t = params.tau * s, -s / params.tau
    sc, tc = Fraction(params.center_spatial), Fraction(params.center_time)
    a = params.plane.axis
    m = np.eye(4)
    m[a, a] = c
    m[a, 2] = ts
    m[2, a] = s_t
    m[2, 2] = c
    m[3, a] = float(sc - sc * Fraction(c) - tc * Fraction(s_t))
    m[3, 2] = float(tc - sc * Fraction(ts) - tc * Fraction(c))
    return m


def spatial_rotation_matrix(theta: float, y_c: float, x_c: float) -> np.ndarray:
    """Image-plane rotation about ``(y_c, x_c)``; time is untouched.

    Same sign layout as the spatiotemporal rotation with ``tau = 1``:
    ``y' = (y - y_c) cos - (x - x_c) sin + y_c`` and
    ``x' = (y - y_c) sin + (x - x_c) cos + x_c``.
    """
    c, s = math.cos(theta), math.sin(theta)
    m = np.eye(4)
    m[0, 0], m[0, 1] = c, s
    m[1, 0], m[1, 1] = -s, c
    m[3, 0] = -y_c * c + x_c * s + y_c
    m[3, 1] = -y_c * s - x_c * c + x_c
    return m


# --- application ----------------------------------------------------------------

def round_half_away(a: np.ndarray) -> np.ndarray:
    """Nearest integer, ties away from zero (``np.round`` rounds ties to even)."""
    return np.copysign(np.floor(np.abs(a) + 0.5), a)


def _affine_columns(stream: EventStream, m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Real-valued ``(y', x', t')`` of ``[y, x, t, 1] @ m``, touching only the columns that change."""
    cols = (stream.y.astype(np.float64), stream.x.astype(np.float64), stream.t.astype(np.float64))
    out = []
    for j in range(3):
        acc = None
        for i in range(3):
            w = m[i, j]
            if w == 0.0:
                continue
            term = cols[i] if w == 1.0 else cols[i] * w
            acc = term.copy() if acc is None else acc + term
        if acc is None:
            acc = np.zeros(len(stream))
        if m[3, j] != 0.0:
            acc += m[3, j]
        out.append(acc)
    return out[0], out[1], out[2]


def apply_matrix(stream: EventStream, m: np.ndarray) -> tuple[EventStream, TransformStats]:
    """Map every event through ``m``, round, drop what falls off the sensor or before ``t = 0``.

    An event that is both out of bounds and negative in time is counted as a
    spatial discard. Polarity is carried through unchanged.
    """
    n = len(stream)
    if n == 0:
        return stream, TransformStats(0, 0)
    g = stream.geometry
    yf, xf, tf = _affine_columns(stream, m)
    y = round_half_away(yf)
    x = round_half_away(xf)
    t = round_half_away(tf)
    inside = (y >= 0) & (y < g.height) & (x >= 0) & (x < g.width)
    keep = inside & (t >= 0)
    n_spatial = n - int(inside.sum())
    n_kept = int(keep.sum())
    out = EventStream(
        y[keep].astype(np.int64), x[keep].astype(np.int64), t[keep].astype(np.int64), stream.p[keep], g
    )
    stats = TransformStats(n, n_kept, n_spatial, n - n_kept - n_spatial)
    return canonicalize(out), stats


def apply_vpt(stream: EventStream, params: VptParams) -> tuple[EventStream, TransformStats]:
    """Viewpoint transform: rotate the stream in the chosen space-time plane."""
    return apply_matrix(stream, vpt_matrix(params))


def apply_spatial_rotation(stream: EventStream, theta: float, center: tuple[float, float]):
    """Plain image-plane rotation baseline; returns ``(stream, stats)``."""
    y_c, x_c = center
    return apply_matrix(stream, spatial_rotation_matrix(float(theta), float(y_c), float(x_c)))


def sts_time(t, coord, tau: float, theta: float, center_spatial: float):
    """Stretched timestamps ``t - tau * tan(theta) * (coord - center)``, real valued."""
    return t - tau * math.tan(theta) * (np.asarray(coord, dtype=np.float64) - center_spatial)


def apply_sts(stream: EventStream, plane, theta: float, tau: float, center_spatial: float) -> EventStream:
    """Spatiotemporal stretching: shear time by the distance from the spatial center.

    Spatial coordinates never change, so no event is lost. After rounding, the
    stream is shifted as a whole so that its earliest event keeps the input's
    earliest timestamp: a stream starting at ``t = 0`` still starts there, no
    timestamp goes negative, and ``theta = 0`` is an exact identity.
    """
    plane = as_plane(plane)
    theta = check_theta(theta)
    tau = check_tau(tau)
    if len(stream) == 0:
        return stream
    coord = stream.y if plane is Plane.YT else stream.x
    t = round_half_away(sts_time(stream.t.astype(np.float64), coord, tau, theta, float(center_spatial)))
    t = t.astype(np.int64)
    t += int(stream.t.min()) - t.min()
    return canonicalize(stream.replace(t=t))


def default_tau(stream: EventStream) -> float:
    """Stream duration divided by the larger sensor side, in microseconds per pixel."""
    if len(stream) < 2:
        raise EmptyInputError("default tau needs at least two events; pass tau explicitly")
    duration = int(stream.t.max()) - int(stream.t.min())
    if duration <= 0:
        raise InputDomainError("all events share one timestamp, so no default tau exists; pass tau explicitly")
    g = stream.geometry
    return duration / max(g.width, g.height)


def spatial_midpoint(stream: EventStream, plane) -> float:
    g = stream.geometry
    return (g.height - 1) / 2 if as_plane(plane) is Plane.YT else (g.width - 1) / 2


def temporal_midpoint(stream: EventStream) -> float:
    if len(stream) == 0:
        return 0.0
    return (int(stream.t.min()) + int(stream.t.max())) / 2
