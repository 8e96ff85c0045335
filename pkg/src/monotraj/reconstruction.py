"""Metric 3D positions from principal segments and known drone widths."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .camera import CameraIntrinsics, backproject, ray_angle
from .errors import (
    ConfigError,
    DegenerateAngleError,
    DegenerateMaskError,
    IoFailureError,
    IsotropicMaskError,
    UnknownClassError,
)
from .rotation2d import BoundingBox, ForegroundMask, PrincipalSegment, baseline_segment, segment_for_strategy
from .tracking import Track

SPEC_DB_ENV = "MONOTRAJ_SPEC_DB"
_MIN_ANGLE = 1e-9


@dataclass(frozen=True)
class DroneSpec:
    """Physical body dimensions in millimetres; width is the longest side."""

    drone_class: str
    width_mm: float
    depth_mm: float
    height_mm: float

    def __post_init__(self):
        if min(self.width_mm, self.depth_mm, self.height_mm) <= 0:
            raise ValueError(f"{self.drone_class}: dimensions must be positive")
        if self.width_mm < self.depth_mm or self.width_mm < self.height_mm:
            raise ValueError(f"{self.drone_class}: width must be the longest dimension")


class SpecDatabase(dict):
    """Mapping from class name to :class:`DroneSpec`; missing keys raise UnknownClassError."""

    def __missing__(self, key):
        raise UnknownClassError(key)


def default_spec_database() -> SpecDatabase:
    specs = [
        DroneSpec("Air2S", 253.0, 183.0, 77.0),
        DroneSpec("Mavic3", 347.5, 283.0, 107.7),
        DroneSpec("Mini3", 245.0, 171.0, 62.0),
        DroneSpec("Tello", 176.3, 98.0, 41.0),
    ]
    return SpecDatabase({s.drone_class: s for s in specs})


def load_spec_database(path) -> SpecDatabase:
    """Read a JSON ``{class: {width_mm, depth_mm, height_mm}}`` file.

    Entries override or extend the default database.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(str(path), "expected a JSON object")
    db = default_spec_database()
    for name, dims in data.items():
        try:
            db[name] = DroneSpec(name, float(dims["width_mm"]), float(dims["depth_mm"]), float(dims["height_mm"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(name, f"invalid drone spec ({exc})") from None
    return db


def spec_database_from_env() -> SpecDatabase:
    path = os.environ.get(SPEC_DB_ENV)
    return load_spec_database(path) if path else default_spec_database()


@dataclass(frozen=True, eq=False)
class TrajectoryPoint3D:
    frame: int
    position: np.ndarray
    distance_mm: float
    theta_rad: float


@dataclass
class Trajectory3D:
    track_id: int
    drone_class: str
    points: list[TrajectoryPoint3D] = field(default_factory=list)
    width_mm: float | None = None

    @property
    def frames(self) -> np.ndarray:
        return np.array([p.frame for p in self.points], dtype=int)

    @property
    def positions(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 3))
        return np.array([p.position for p in self.points])

    def __len__(self):
        return len(self.points)


def drone_distance(v1, v2, width_mm: float) -> float:
    """Camera-to-drone distance ``D = l / (2 tan(theta / 2))``.

    Exact when the segment of length ``l`` is perpendicular to, and bisected
    by, the line of sight.
    """
    theta = ray_angle(v1, v2)
    if theta <= _MIN_ANGLE:
        raise DegenerateAngleError(f"endpoint rays subtend {theta:.3g} rad")
    return width_mm / (2.0 * math.tan(theta / 2.0))


def drone_position(v1, v2, width_mm: float) -> tuple[np.ndarray, float, float]:
    """Place the drone at distance D along the mean of the two endpoint rays.

    Returns:
        (position, distance_mm, theta_rad)
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    theta = ray_angle(v1, v2)
    if theta <= _MIN_ANGLE:
        raise DegenerateAngleError(f"endpoint rays subtend {theta:.3g} rad")
    distance = width_mm / (2.0 * math.tan(theta / 2.0))
    v_cam = 0.5 * (v1 + v2)
    return distance * v_cam / np.linalg.norm(v_cam), distance, theta


def point_from_segment(
    frame: int, segment: PrincipalSegment, intrinsics: CameraIntrinsics, width_mm: float
) -> TrajectoryPoint3D:
    v1 = backproject(intrinsics, segment.p1)
    v2 = backproject(intrinsics, segment.p2)
    position, distance, theta = drone_position(v1, v2, width_mm)
    return TrajectoryPoint3D(frame, position, distance, theta)


MaskLookup = Callable[[int, BoundingBox], "ForegroundMask | None"]

_RECOVERABLE = (DegenerateMaskError, IsotropicMaskError, DegenerateAngleError)


def reconstruct_track(
    track: Track,
    segments: dict[int, PrincipalSegment | None],
    intrinsics: CameraIntrinsics,
    specs: SpecDatabase | None = None,
) -> Trajectory3D:
    """Back-project per-frame segments of one track into a 3D trajectory.

    A frame whose segment is missing (``None``) or whose rays coincide is
    retried with the width baseline of the track box; frames that are still
    degenerate are dropped.

    Raises:
        UnknownClassError: if the track class is not in ``specs``.
    """
    specs = specs if specs is not None else default_spec_database()
    width = specs[track.drone_class].width_mm
    traj = Trajectory3D(track.id, track.drone_class, width_mm=width)
    for frame, box in track.states:
        if frame not in segments:
            continue
        segment = segments[frame]
        point = None
        if segment is not None:
            try:
                point = point_from_segment(frame, segment, intrinsics, width)
            except DegenerateAngleError:
                point = None
        if point is None:
            try:
                point = point_from_segment(frame, baseline_segment(box, "width"), intrinsics, width)
            except DegenerateAngleError:
                continue
        traj.points.append(point)
    return traj


def track_segments(track: Track, strategy: str, masks: MaskLookup | None = None) -> dict[int, PrincipalSegment | None]:
    """Per-frame segments of a track for one strategy.

    ``masks(frame, box)`` supplies the foreground mask for the pca strategy;
    frames where PCA is degenerate map to ``None`` (the caller falls back).
    """
    out: dict[int, PrincipalSegment | None] = {}
    for frame, box in track.states:
        if strategy == "pca":
            mask = masks(frame, box) if masks is not None else None
            if mask is None:
                out[frame] = None
                continue
            try:
                out[frame] = segment_for_strategy("pca", box, mask)
            except _RECOVERABLE:
                out[frame] = None
        else:
            out[frame] = segment_for_strategy(strategy, box)
    return out


def check_window(window) -> int:
    if isinstance(window, bool) or not isinstance(window, (int, np.integer)) or window < 1 or window % 2 == 0:
        raise ValueError(f"window must be an odd integer >= 1, got {window!r}")
    return int(window)


def moving_average(values, window: int) -> np.ndarray:
    """Centred moving average along axis 0, truncated at the sequence ends.

    ``out[i]`` is the mean of ``values[max(i - w//2, 0) : i + w//2 + 1]``, so
    the output has the input's length.
    """
    window = check_window(window)
    values = np.asarray(values, dtype=float)
    if window == 1 or len(values) == 0:
        return values.copy()
    half = window // 2
    return np.array([values[max(i - half, 0) : i + half + 1].mean(axis=0) for i in range(len(values))])


def smooth(traj: Trajectory3D, window: int) -> Trajectory3D:
    """Moving-average the positions of a trajectory (see :func:`moving_average`).

    Distance and angle are recomputed from the averaged positions.
    """
    window = check_window(window)
    if window == 1 or not traj.points:
        return Trajectory3D(traj.track_id, traj.drone_class, list(traj.points), traj.width_mm)
    averaged = moving_average(traj.positions, window)
    width = traj.width_mm
    points = []
    for p, new in zip(traj.points, averaged):
        distance = float(np.linalg.norm(new))
        width_here = width if width is not None else 2.0 * p.distance_mm * math.tan(p.theta_rad / 2.0)
        theta = 2.0 * math.atan(width_here / (2.0 * distance)) if distance > 0 else math.pi
        points.append(TrajectoryPoint3D(p.frame, new, distance, theta))
    return Trajectory3D(traj.track_id, traj.drone_class, points, width)
