"""Viewpoint-transform and spatiotemporal-stretching augmentation for event streams."""

__version__ = "0.1.0"

from .core import (
    EmptyInputError,
    Event,
    EventError,
    EventStream,
    InputDomainError,
    SensorGeometry,
    Violation,
    canonicalize,
    normalize_time,
    validate,
)
from .transforms import (
    Plane,
    TransformStats,
    VptParams,
    apply_matrix,
    apply_spatial_rotation,
    apply_sts,
    apply_vpt,
    balanced_rotation,
    default_tau,
    spatial_rotation_matrix,
    translation_back,
    translation_to_center,
    vpt_matrix,
)
from .augment import AugmentConfig, RotationParams, StsParams, augment, sample_params
from .fileio import FormatTag, decode, encode, read_events, write_events
from .representations import Raster, event_count, event_frame, raster_distance, rasterize, voxel_grid
from .synth import MovingEdge, RotatingBar, ThresholdConfig, UniformRamp, generate, predict_sts_shift
