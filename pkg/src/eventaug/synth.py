"""Noise-free synthetic event generation from closed-form log-brightness scenes.

A pixel keeps a reference log level; whenever the scene's log brightness moves
a full contrast threshold ``C`` away from it, one event of that sign is emitted
and the reference moves by ``C`` toward the current level. Crossing times are
solved exactly for every scene kind, so there is no integration step size.

Conventions:
  * a step larger than ``C`` (edge arrival) emits ``floor(|step| / C)`` events
    with the same timestamp;
  * during the refractory period after an emitted event, further threshold
    crossings at that pixel still move the reference level but emit nothing;
  * timestamps are rounded to whole microseconds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EventError, EventStream, InputDomainError, SensorGeometry, canonicalize
from .transforms import Plane, check_tau, check_theta, as_plane, round_half_away

US_PER_S = 1_000_000
# slack for floor(|r| T / C) when the ratio is an integer up to float error
_COUNT_SLACK = 1e-9


class UnsupportedSceneError(EventError):
    pass


@dataclass(frozen=True)
class UniformRamp:
    """Every pixel's log brightness changes at ``rate`` log-units per second."""
    rate: float
    geometry: SensorGeometry
    duration_us: int


@dataclass(frozen=True)
class MovingEdge:
    """A straight edge sweeping along ``axis`` ("x" or "y") at ``velocity`` px/s.

    Pixels the edge has passed sit ``contrast`` log-units above the rest. The
    edge starts at ``start`` (default: half a pixel outside the sensor on the
    side it comes from); pixels already behind it at ``t = 0`` emit nothing.
    """
    velocity: float
    geometry: SensorGeometry
    duration_us: int
    axis: str = "x"
    contrast: float = 1.0
    start: float | None = None


@dataclass(frozen=True)
class RotatingBar:
    """A bar of ``bar_width`` px through ``center`` rotating at ``omega`` rad/s.

    Pixels covered by the bar are ``contrast`` log-units brighter. The bar
    starts along the +x direction at ``t = 0``.
    """
    omega: float
    geometry: SensorGeometry
    duration_us: int
    contrast: float = 1.0
    bar_width: float = 2.0
    center: tuple[float, float] | None = None  # (y, x)


@dataclass(frozen=True)
class ThresholdConfig:
    C: float
    refractory_us: float = 0.0
    jitter: float = 0.0  # std of additive per-pixel threshold noise; 0 = noise free
    seed: int = 0

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise InputDomainError(f"contrast threshold must be positive, got {self.C}")
        if self.refractory_us < 0:
            raise InputDomainError(f"refractory period must be non-negative, got {self.refractory_us}")
        if self.jitter < 0:
            raise InputDomainError(f"threshold jitter must be non-negative, got {self.jitter}")


def _check_scene(scene) -> None:
    if not isinstance(scene, (UniformRamp, MovingEdge, RotatingBar)):
        raise UnsupportedSceneError(f"unknown scene type {type(scene).__name__}")
    if not (int(scene.duration_us) > 0):
        raise InputDomainError(f"scene duration must be positive, got {scene.duration_us}")
    for name in ("rate", "velocity", "omega", "contrast"):
        v = getattr(scene, name, 0.0)
        if not math.isfinite(v):
            raise InputDomainError(f"scene {name} must be finite, got {v}")
    if isinstance(scene, MovingEdge) and scene.axis not in ("x", "y"):
        raise InputDomainError(f"edge axis must be 'x' or 'y', got {scene.axis!r}")


def _thresholds(cfg: ThresholdConfig, npix: int) -> np.ndarray:
    if cfg.jitter == 0:
        return np.full(npix, float(cfg.C))
    rng = np.random.default_rng(cfg.seed)
    return np.maximum(cfg.C + cfg.jitter * rng.standard_normal(npix), 1e-6 * cfg.C)


def _refractory(times: list[float], polarities: list[int], gap: float):
    if gap <= 0 or not times:
        return times, polarities
    kt, kp = [], []
    last = -math.inf
    for t, p in zip(times, polarities):
        if t - last >= gap:
            kt.append(t)
            kp.append(p)
            last = t
    return kt, kp


def _step_events(step_times, steps, C: float):
    """Events from a piecewise-constant log signal given as (time, jump) pairs."""
    level = ref = 0.0
    times, pols = [], []
    for t, dl in zip(step_times, steps):
        level += dl
        n = int(math.floor(abs(level - ref) / C + _COUNT_SLACK))
        if n:
            p = 1 if level > ref else -1
            times.extend([t] * n)
            pols.extend([p] * n)
            ref += p * n * C
    return times, pols


def _ramp(scene: UniformRamp, cfg: ThresholdConfig):
    g = scene.geometry
    npix = g.width * g.height
    r = abs(float(scene.rate))
    if r == 0:
        return [], [], [], []
    pol = 1 if scene.rate > 0 else -1
    T = scene.duration_us / US_PER_S
    C = _thresholds(cfg, npix)
    n = np.floor(r * T / C + _COUNT_SLACK).astype(np.int64)
    ys, xs, ts, ps = [], [], [], []
    uniform = cfg.jitter == 0 and cfg.refractory_us <= 0
    if uniform:
        k = np.arange(1, n[0] + 1)
        train = k * C[0] * US_PER_S / r
        m = len(train)
        pix = np.repeat(np.arange(npix), m)
        ys.append(pix // g.width)
        xs.append(pix % g.width)
        ts.append(np.tile(train, npix))
        ps.append(np.full(pix.size, pol))
        return ys, xs, ts, ps
    for i in range(npix):
        train = (np.arange(1, n[i] + 1) * C[i] * US_PER_S / r).tolist()
        train, pl = _refractory(train, [pol] * len(train), cfg.refractory_us)
        ys.append(np.full(len(train), i // g.width))
        xs.append(np.full(len(train), i % g.width))
        ts.append(np.asarray(train, dtype=np.float64))
        ps.append(np.asarray(pl, dtype=np.int64))
    return ys, xs, ts, ps


def _edge(scene: MovingEdge, cfg: ThresholdConfig):
    g = scene.geometry
    v = float(scene.velocity)
    span = g.width if scene.axis == "x" else g.height
    if v == 0 or scene.contrast == 0:
        return [], [], [], []
    start = scene.start
    if start is None:
        start = -0.5 if v > 0 else span - 0.5
    coord = np.arange(span, dtype=np.float64)
    cross = (coord - start) / v * US_PER_S  # edge reaches pixel center
    C = _thresholds(cfg, g.width * g.height).reshape(g.height, g.width)
    ys, xs, ts, ps = [], [], [], []
    for c in range(span):
        t = cross[c]
        if not (0 < t <= scene.duration_us):
            continue
        line = C[:, c] if scene.axis == "x" else C[c, :]
        for j, Cj in enumerate(line):
            times, pols = _step_events([t], [scene.contrast], float(Cj))
            times, pols = _refractory(times, pols, cfg.refractory_us)
            k = len(times)
            y, x = (j, c) if scene.axis == "x" else (c, j)
            ys.append(np.full(k, y))
            xs.append(np.full(k, x))
            ts.append(np.asarray(times, dtype=np.float64))
            ps.append(np.asarray(pols, dtype=np.int64))
    return ys, xs, ts, ps


def _bar_transitions(rho: float, alpha: float, half: float, omega: float, T: float):
    """Sorted (time_s, +1 enter / -1 exit) of a pixel at polar (rho, alpha) w.r.t. the bar."""
    if rho <= half:
        return []
    beta = math.asin(half / rho)
    phase_end = omega * T
    lo, hi = min(0.0, phase_end), max(0.0, phase_end)
    out = []
    # inside while the bar angle phi is within beta of alpha (mod pi)
    k0 = math.floor((lo - alpha - beta) / math.pi) - 1
    k1 = math.ceil((hi - alpha + beta) / math.pi) + 1
    for k in range(k0, k1 + 1):
        a, b = alpha - beta + k * math.pi, alpha + beta + k * math.pi
        for phi, kind in ((a, 1), (b, -1)):
            if lo < phi <= hi if omega > 0 else lo <= phi < hi:
                t = phi / omega
                # moving backwards in angle swaps entering and leaving
                out.append((t, kind if omega > 0 else -kind))
    out.sort()
    return [(t, k) for t, k in out if 0 < t <= T]


def _bar(scene: RotatingBar, cfg: ThresholdConfig):
    g = scene.geometry
    if scene.omega == 0 or scene.contrast == 0:
        return [], [], [], []
    cy, cx = scene.center if scene.center is not None else ((g.height - 1) / 2, (g.width - 1) / 2)
    T = scene.duration_us / US_PER_S
    C = _thresholds(cfg, g.width * g.height).reshape(g.height, g.width)
    half = scene.bar_width / 2
    ys, xs, ts, ps = [], [], [], []
    for y in range(g.height):
        for x in range(g.width):
            dy, dx = y - cy, x - cx
            trans = _bar_transitions(math.hypot(dy, dx), math.atan2(dy, dx), half, scene.omega, T)
            if not trans:
                continue
            times, pols = _step_events([t * US_PER_S for t, _ in trans],
                                       [k * scene.contrast for _, k in trans], float(C[y, x]))
            times, pols = _refractory(times, pols, cfg.refractory_us)
            ys.append(np.full(len(times), y))
            xs.append(np.full(len(times), x))
            ts.append(np.asarray(times, dtype=np.float64))
            ps.append(np.asarray(pols, dtype=np.int64))
    return ys, xs, ts, ps


def generate(scene, cfg: ThresholdConfig) -> EventStream:
    """Events produced by ``scene`` under the threshold model, canonicalized."""
    _check_scene(scene)
    if isinstance(scene, UniformRamp):
        parts = _ramp(scene, cfg)
    elif isinstance(scene, MovingEdge):
        parts = _edge(scene, cfg)
    else:
        parts = _bar(scene, cfg)
    g = scene.geometry
    ys, xs, ts, ps = parts
    if not ts or sum(len(t) for t in ts) == 0:
        return EventStream.empty(g)
    t = round_half_away(np.concatenate(ts)).astype(np.int64)
    return canonicalize(EventStream(np.concatenate(ys), np.concatenate(xs), t, np.concatenate(ps), g))


def predict_sts_shift(scene, plane, theta: float, tau: float, center_spatial: float) -> np.ndarray:
    """Expected per-pixel time shift (µs, before re-zeroing) of stretching ``scene``.

    Only meaningful for scenes whose pixels share identical event trains; a
    (height, width) array of ``-tau * tan(theta) * (coord - center)``.
    """
    if not isinstance(scene, UniformRamp):
        raise UnsupportedSceneError(f"shift prediction needs a UniformRamp scene, got {type(scene).__name__}")
    plane = as_plane(plane)
    theta, tau = check_theta(theta), check_tau(tau)
    g = scene.geometry
    yy, xx = np.mgrid[0:g.height, 0:g.width]
    coord = yy if plane is Plane.YT else xx
    return -tau * math.tan(theta) * (coord - float(center_spatial))


# --- scene config files ---------------------------------------------------------

_SCENE_KINDS = {"uniform_ramp": UniformRamp, "moving_edge": MovingEdge, "rotating_bar": RotatingBar}


def parse_scene_config(text: str):
    """Parse ``key = value`` lines (``#`` comments) into ``(scene, ThresholdConfig)``.

    Keys: ``kind`` (uniform_ramp | moving_edge | rotating_bar), ``width``,
    ``height``, ``duration_us``, scene parameters (``rate``; ``velocity``,
    ``axis``, ``contrast``, ``start``; ``omega``, ``contrast``, ``bar_width``),
    and threshold settings ``threshold``, ``refractory_us``, ``jitter``, ``seed``.
    """
    kv: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputDomainError(f"scene config line {n}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        kv[k.lower()] = v
    try:
        kind = kv.pop("kind")
        cls = _SCENE_KINDS[kind]
        geometry = SensorGeometry(int(kv.pop("width")), int(kv.pop("height")))
        duration = int(float(kv.pop("duration_us")))
        cfg = ThresholdConfig(
            C=float(kv.pop("threshold")),
            refractory_us=float(kv.pop("refractory_us", 0)),
            jitter=float(kv.pop("jitter", 0)),
            seed=int(kv.pop("seed", 0)),
        )
        if cls is UniformRamp:
            scene = UniformRamp(float(kv.pop("rate")), geometry, duration)
        elif cls is MovingEdge:
            start = kv.pop("start", None)
            scene = MovingEdge(float(kv.pop("velocity")), geometry, duration, axis=kv.pop("axis", "x"),
                               contrast=float(kv.pop("contrast", 1.0)),
                               start=None if start is None else float(start))
        else:
            scene = RotatingBar(float(kv.pop("omega")), geometry, duration,
                                contrast=float(kv.pop("contrast", 1.0)),
                                bar_width=float(kv.pop("bar_width", 2.0)))
    except KeyError as e:
        raise InputDomainError(f"scene config is missing key or has unknown kind: {e}") from None
    except ValueError as e:
        raise InputDomainError(f"scene config has a malformed value: {e}") from None
    if kv:
        raise InputDomainError(f"unknown scene config keys: {', '.join(sorted(kv))}")
    _check_scene(scene)
    return scene, cfg
