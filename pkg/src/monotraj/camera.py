"""Pinhole camera model.

Conventions:
- Extrinsics map world to camera coordinates: ``p_c = R @ p_w + t``.
- The camera looks down +Z; image x grows to the right, image y grows down.
- Integer pixel coordinates refer to pixel centres.
- Lengths are millimetres, image coordinates are pixels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, IoFailureError, NonPositiveDepthError, ZeroVectorError

_ORTHONORMAL_TOL = 1e-9


class ImagePoint(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class CameraIntrinsics:
    """Intrinsic parameters of an undistorted pinhole camera.

    Attributes:
        fx, fy: Focal lengths in pixels.
        cx, cy: Principal point in pixels.
        skew: Skew coefficient (``K[0, 1]``), usually 0.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    skew: float = 0.0

    def __post_init__(self):
        for name in ("fx", "fy", "cx", "cy", "skew"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, self.skew, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def inverse_matrix(self) -> np.ndarray:
        """Closed-form inverse of the upper-triangular K."""
        fx, fy, s = self.fx, self.fy, self.skew
        return np.array(
            [
                [1.0 / fx, -s / (fx * fy), (s * self.cy - self.cx * fy) / (fx * fy)],
                [0.0, 1.0 / fy, -self.cy / fy],
                [0.0, 0.0, 1.0],
            ]
        )


@dataclass(frozen=True, eq=False)
class CameraExtrinsics:
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if not np.allclose(R @ R.T, np.eye(3), atol=_ORTHONORMAL_TOL, rtol=0):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > _ORTHONORMAL_TOL:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)


def rotation_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rotation_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rotation_z(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def world_to_camera(extrinsics: CameraExtrinsics, p_world) -> np.ndarray:
    return extrinsics.rotation @ np.asarray(p_world, dtype=float) + extrinsics.translation


def project(intrinsics: CameraIntrinsics, p_camera) -> ImagePoint:
    """Project a camera-frame point (mm) to pixel coordinates.

    Raises:
        NonPositiveDepthError: if the point is on or behind the camera plane.
    """
    x, y, z = (float(c) for c in p_camera)
    if not z > 0:
        raise NonPositiveDepthError(f"cannot project point with depth {z}")
    u = (intrinsics.fx * x + intrinsics.skew * y) / z + intrinsics.cx
    v = intrinsics.fy * y / z + intrinsics.cy
    return ImagePoint(u, v)


def project_points(intrinsics: CameraIntrinsics, points) -> np.ndarray:
    """Vectorised :func:`project` for an (N, 3) array; returns (N, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    z = pts[:, 2]
    if np.any(~(z > 0)):
        raise NonPositiveDepthError("cannot project points with non-positive depth")
    u = (intrinsics.fx * pts[:, 0] + intrinsics.skew * pts[:, 1]) / z + intrinsics.cx
    v = intrinsics.fy * pts[:, 1] / z + intrinsics.cy
    return np.column_stack([u, v])


def backproject(intrinsics: CameraIntrinsics, p) -> np.ndarray:
    """Return the (unnormalised) viewing ray ``K^-1 [u, v, 1]^T`` of a pixel.

    The ray has z = 1, so scaling it by a depth gives the 3D point at that depth.
    """
    u, v = float(p[0]), float(p[1])
    y = (v - intrinsics.cy) / intrinsics.fy
    x = (u - intrinsics.cx - intrinsics.skew * y) / intrinsics.fx
    return np.array([x, y, 1.0])


def ray_angle(a, b) -> float:
    """Angle in radians between two rays, in ``[0, pi]``.

    Uses ``atan2(|a x b|, a . b)`` rather than ``acos`` of the cosine: the
    latter loses about half the significant digits for nearly parallel rays,
    which is exactly the regime of a distant drone.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-12 or nb < 1e-12:
        raise ZeroVectorError("ray angle undefined for a zero-length ray")
    a, b = a / na, b / nb
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))


# -- camera files -----------------------------------------------------------


def camera_to_dict(intrinsics: CameraIntrinsics, extrinsics: CameraExtrinsics | None = None) -> dict:
    extrinsics = extrinsics or CameraExtrinsics()
    return {
        "fx": intrinsics.fx,
        "fy": intrinsics.fy,
        "cx": intrinsics.cx,
        "cy": intrinsics.cy,
        "skew": intrinsics.skew,
        "rotation": [float(x) for x in extrinsics.rotation.ravel()],
        "translation": [float(x) for x in extrinsics.translation],
    }


def camera_from_dict(data: dict) -> tuple[CameraIntrinsics, CameraExtrinsics]:
    def number(key, default=None):
        if key not in data:
            if default is None:
                raise ConfigError(key, "missing")
            return default
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)

    def numbers(key, n, default):
        value = data.get(key, default)
        if not isinstance(value, list) or len(value) != n:
            raise ConfigError(key, f"expected a list of {n} numbers")
        try:
            return np.array(value, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(key, "non-numeric entry") from None

    values = {key: number(key) for key in ("fx", "fy", "cx", "cy")}
    values["skew"] = number("skew", 0.0)
    for key, value in values.items():
        if not math.isfinite(value):
            raise ConfigError(key, "must be finite")
        if key in ("fx", "fy") and value <= 0:
            raise ConfigError(key, f"focal length must be positive, got {value}")
    intrinsics = CameraIntrinsics(**values)
    rotation = numbers("rotation", 9, np.eye(3).ravel().tolist()).reshape(3, 3)
    translation = numbers("translation", 3, [0.0, 0.0, 0.0])
    try:
        extrinsics = CameraExtrinsics(rotation, translation)
    except ValueError as exc:
        raise ConfigError("rotation", str(exc)) from None
    return intrinsics, extrinsics


def save_camera(path, intrinsics: CameraIntrinsics, extrinsics: CameraExtrinsics | None = None):
    path = Path(path)
    try:
        path.write_text(json.dumps(camera_to_dict(intrinsics, extrinsics), indent=2) + "\n")
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc


def load_camera(path) -> tuple[CameraIntrinsics, CameraExtrinsics]:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(str(path), "expected a JSON object")
    return camera_from_dict(data)
