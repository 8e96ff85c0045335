"""Monocular 3D trajectory reconstruction for drones of known size.

A drone's bounding box and foreground mask give a 2D principal segment; the
angle that segment subtends at the camera, together with the drone's
published width, fixes its distance and hence its 3D position.
"""

from .camera import CameraExtrinsics, CameraIntrinsics, ImagePoint, backproject, project, ray_angle
from .errors import (
    ConfigError,
    DegenerateAngleError,
    DegenerateMaskError,
    EmptyGroundTruthError,
    FormatError,
    IoFailureError,
    IsotropicMaskError,
    MonotrajError,
    NonPositiveDepthError,
    NoOverlapError,
    UnknownClassError,
    ZeroVectorError,
)
from .estimators import DronePositionEstimator, PrincipalSegmentEstimator, TrajectorySmoother
from .metrics import compare_strategies, mota, sequence_error, trajectory_error
from .pipeline import reconstruct_sequence
from .reconstruction import (
    DroneSpec,
    Trajectory3D,
    default_spec_database,
    drone_distance,
    drone_position,
    load_spec_database,
    smooth,
)
from .rotation2d import STRATEGIES, BoundingBox, ForegroundMask, PrincipalSegment, estimate_principal_segment, principal_axis
from .simulator import BUILTIN_NAMES, SimulatedScenario, builtin_scenario, generate_scenario
from .tracking import Detection, DetectorNoiseModel, Track, associate, iou

__version__ = "0.1.0"
