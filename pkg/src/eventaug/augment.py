"""Seeded random augmentation: parameter sampling and per-stream dispatch."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import EventStream, InputDomainError
from .transforms import (
    HALF_PI,
    Plane,
    TransformStats,
    VptParams,
    check_tau,
    check_theta,
    apply_spatial_rotation,
    apply_sts,
    apply_vpt,
    default_tau,
    temporal_midpoint,
)

STRATEGIES = ("none", "rotation", "vpt", "sts", "vpt-sts")
DEFAULT_THETA_MAX = math.pi / 6


@dataclass(frozen=True)
class AugmentConfig:
    strategy: str = "vpt-sts"
    theta_max: float = DEFAULT_THETA_MAX
    tau: float | str = "auto"
    center: str = "random"  # or "midpoint"
    plane: str = "random"  # "yt" | "xt" | "random"
    seed: int = 0
    prob: float = 1.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InputDomainError(f"unknown strategy {self.strategy!r}; choose from {', '.join(STRATEGIES)}")
        if not (0 <= self.theta_max < HALF_PI):
            raise InputDomainError(f"theta_max must lie in [0, pi/2), got {self.theta_max}")
        if self.tau != "auto":
            object.__setattr__(self, "tau", check_tau(self.tau))
        if self.center not in ("midpoint", "random"):
            raise InputDomainError(f"center must be 'midpoint' or 'random', got {self.center!r}")
        if self.plane not in ("yt", "xt", "random"):
            raise InputDomainError(f"plane must be 'yt', 'xt' or 'random', got {self.plane!r}")
        if not (0.0 <= self.prob <= 1.0):
            raise InputDomainError(f"prob must lie in [0, 1], got {self.prob}")
        if int(self.seed) < 0:
            raise InputDomainError("seed must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StsParams:
    plane: Plane
    theta: float
    tau: float
    center_spatial: float

    def __post_init__(self):
        object.__setattr__(self, "plane", Plane(self.plane))
        object.__setattr__(self, "theta", check_theta(self.theta))
        object.__setattr__(self, "tau", check_tau(self.tau))

    def to_dict(self) -> dict:
        return {"plane": self.plane.value, "theta": self.theta, "tau": self.tau,
                "center_spatial": self.center_spatial}


@dataclass(frozen=True)
class RotationParams:
    theta: float
    center_y: float
    center_x: float

    def to_dict(self) -> dict:
        return asdict(self)


def item_seed(seed: int, index: int) -> int:
    """Per-item seed; independent of processing order."""
    return int(seed) ^ int(index)


def sample_params(rng_seed: int, config: AugmentConfig, stream: EventStream):
    """Draw one set of transform parameters for ``stream``.

    Returns :class:`VptParams`, :class:`StsParams`, :class:`RotationParams`, or
    ``None`` when the sample is left untouched (strategy ``none`` or the
    ``prob`` draw failed, or the stream is empty). Every draw is made in a fixed order whatever the
    strategy, so the same seed always consumes the generator identically.
    """
    rng = np.random.default_rng(int(rng_seed))
    u_apply, u_kind, u_plane = rng.random(3)
    theta = float(rng.uniform(-config.theta_max, config.theta_max)) if config.theta_max > 0 else 0.0
    u_cy, u_cx = rng.random(2)

    if config.strategy == "none" or u_apply >= config.prob or len(stream) == 0:
        return None
    kind = config.strategy
    if kind == "vpt-sts":
        kind = "vpt" if u_kind < 0.5 else "sts"

    g = stream.geometry
    if config.center == "random":
        cy, cx = u_cy * (g.height - 1), u_cx * (g.width - 1)
    else:
        cy, cx = (g.height - 1) / 2, (g.width - 1) / 2

    if kind == "rotation":
        return RotationParams(theta, cy, cx)

    if config.plane == "random":
        plane = Plane.YT if u_plane < 0.5 else Plane.XT
    else:
        plane = Plane(config.plane)
    tau = default_tau(stream) if config.tau == "auto" else config.tau
    center_spatial = cy if plane is Plane.YT else cx
    if kind == "vpt":
        return VptParams(plane, theta, tau, center_spatial, temporal_midpoint(stream))
    return StsParams(plane, theta, tau, center_spatial)


def apply_params(stream: EventStream, params) -> tuple[EventStream, TransformStats]:
    """Run the transform described by ``params`` (``None`` is the identity)."""
    n = len(stream)
    if params is None:
        return stream, TransformStats(n, n)
    if isinstance(params, VptParams):
        return apply_vpt(stream, params)
    if isinstance(params, StsParams):
        out = apply_sts(stream, params.plane, params.theta, params.tau, params.center_spatial)
        return out, TransformStats(n, len(out))
    if isinstance(params, RotationParams):
        return apply_spatial_rotation(stream, params.theta, (params.center_y, params.center_x))
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def params_record(params) -> dict:
    if params is None:
        return {"transform": "identity"}
    name = {VptParams: "vpt", StsParams: "sts", RotationParams: "rotation"}[type(params)]
    return {"transform": name, **params.to_dict()}


def augment(stream: EventStream, config: AugmentConfig, seed: int | None = None):
    """Sample parameters and transform ``stream``; returns ``(stream, params, stats)``."""
    params = sample_params(config.seed if seed is None else seed, config, stream)
    out, stats = apply_params(stream, params)
    return out, params, stats
