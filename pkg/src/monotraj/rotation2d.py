"""2D drone orientation from foreground masks.

The principal segment of a detection is the chord through the box centre along
the dominant PCA direction of the foreground pixels, clipped by the box edges.
Three box-only baselines (width, height, diagonal) are provided for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import ImagePoint
from .errors import DegenerateMaskError, IsotropicMaskError

STRATEGIES = ("pca", "width", "height", "diagonal")
BASELINES = ("width", "height", "diagonal")

_ISOTROPY_TOL = 1e-6


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box given by its centre and size, in pixels."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box size must be positive, got w={self.w}, h={self.h}")

    @classmethod
    def from_corners(cls, x0, y0, x1, y1) -> "BoundingBox":
        return cls((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0)

    @property
    def x0(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def y0(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def x1(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def y1(self) -> float:
        return self.cy + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)


@dataclass(frozen=True, eq=False)
class ForegroundMask:
    """Binary occupancy image; ``bits[y, x]`` is True for foreground pixel (x, y)."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError("mask bits must be a 2D array")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def empty(cls, width: int, height: int) -> "ForegroundMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def from_pixels(cls, width: int, height: int, xs, ys) -> "ForegroundMask":
        bits = np.zeros((height, width), dtype=bool)
        bits[np.asarray(ys, dtype=int), np.asarray(xs, dtype=int)] = True
        return cls(bits)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def count(self) -> int:
        """Number of foreground pixels (K)."""
        return int(np.count_nonzero(self.bits))

    def pixels(self) -> tuple[np.ndarray, np.ndarray]:
        ys, xs = np.nonzero(self.bits)
        return xs, ys

    def clipped(self, box: BoundingBox) -> "ForegroundMask":
        """Keep only pixels whose centres lie inside ``box`` (edges inclusive)."""
        x_lo = max(0, math.ceil(box.x0))
        x_hi = min(self.width - 1, math.floor(box.x1))
        y_lo = max(0, math.ceil(box.y0))
        y_hi = min(self.height - 1, math.floor(box.y1))
        out = np.zeros_like(self.bits)
        if x_lo <= x_hi and y_lo <= y_hi:
            out[y_lo : y_hi + 1, x_lo : x_hi + 1] = self.bits[y_lo : y_hi + 1, x_lo : x_hi + 1]
        return ForegroundMask(out)

    def __or__(self, other: "ForegroundMask") -> "ForegroundMask":
        return ForegroundMask(self.bits | other.bits)


def mask_bounding_box(mask: ForegroundMask) -> BoundingBox | None:
    """Tight box covering the full pixel extent of the mask, or None if empty.

    Pixel centres sit at integer coordinates, so the box edges are half a
    pixel outside the outermost foreground centres.
    """
    xs, ys = mask.pixels()
    if xs.size == 0:
        return None
    return BoundingBox.from_corners(xs.min() - 0.5, ys.min() - 0.5, xs.max() + 0.5, ys.max() + 0.5)


@dataclass(frozen=True)
class Covariance2:
    sxx: float
    sxy: float
    syy: float
    mean_x: float
    mean_y: float


@dataclass(frozen=True)
class PrincipalAxis:
    direction: tuple[float, float]
    eigenvalue: float
    anisotropy: float


@dataclass(frozen=True)
class PrincipalSegment:
    p1: ImagePoint
    p2: ImagePoint

    def as_array(self) -> np.ndarray:
        return np.array([self.p1.u, self.p1.v, self.p2.u, self.p2.v])

    @property
    def length(self) -> float:
        return math.hypot(self.p2.u - self.p1.u, self.p2.v - self.p1.v)


def covariance_of_points(xs, ys) -> Covariance2:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    k = xs.size
    if k < 2:
        raise DegenerateMaskError(f"need at least 2 foreground pixels, got {k}")
    mx, my = xs.mean(), ys.mean()
    dx, dy = xs - mx, ys - my
    return Covariance2(
        sxx=float(dx @ dx) / k,
        sxy=float(dx @ dy) / k,
        syy=float(dy @ dy) / k,
        mean_x=float(mx),
        mean_y=float(my),
    )


def mask_covariance(mask: ForegroundMask) -> Covariance2:
    """Population (1/K) covariance of the foreground pixel coordinates."""
    return covariance_of_points(*mask.pixels())


def principal_axis(cov: Covariance2) -> PrincipalAxis:
    """Dominant eigenvector of a 2x2 covariance, in closed form.

    The direction is sign-normalised so that x > 0 (or y > 0 when x == 0).

    Raises:
        IsotropicMaskError: if the two eigenvalues are equal to relative 1e-6.
    """
    a, b, c = cov.sxx, cov.sxy, cov.syy
    half_trace = 0.5 * (a + c)
    radius = math.hypot(0.5 * (a - c), b)
    lam_major = half_trace + radius
    lam_minor = half_trace - radius
    if 2.0 * radius / max(lam_major, 1e-12) < _ISOTROPY_TOL:
        raise IsotropicMaskError("covariance is isotropic; principal direction undefined")
    angle = 0.5 * math.atan2(2.0 * b, a - c)
    dx, dy = math.cos(angle), math.sin(angle)
    if abs(dx) < 1e-15:
        dx, dy = 0.0, abs(dy)
    elif dx < 0:
        dx, dy = -dx, -dy
    anisotropy = lam_major / lam_minor if lam_minor > 0 else math.inf
    return PrincipalAxis((dx, dy), lam_major, anisotropy)


def box_line_intersection(box: BoundingBox, direction) -> PrincipalSegment:
    """Intersect the line through the box centre along ``direction`` with the box edges."""
    dx, dy = float(direction[0]), float(direction[1])
    norm = math.hypot(dx, dy)
    if norm == 0:
        raise ValueError("direction must be non-zero")
    dx, dy = dx / norm, dy / norm
    limits = []
    if abs(dx) > 1e-15:
        limits.append(0.5 * box.w / abs(dx))
    if abs(dy) > 1e-15:
        limits.append(0.5 * box.h / abs(dy))
    s = min(limits)
    return PrincipalSegment(
        ImagePoint(box.cx - s * dx, box.cy - s * dy),
        ImagePoint(box.cx + s * dx, box.cy + s * dy),
    )


def estimate_principal_segment(mask: ForegroundMask, box: BoundingBox, clip: bool = True) -> PrincipalSegment:
    """PCA principal segment of the mask pixels inside ``box``.

    Raises:
        DegenerateMaskError: fewer than two foreground pixels in the box.
        IsotropicMaskError: no dominant direction.
    """
    if clip:
        mask = mask.clipped(box)
    axis = principal_axis(mask_covariance(mask))
    return box_line_intersection(box, axis.direction)


def baseline_segment(box: BoundingBox, mode: str) -> PrincipalSegment:
    if mode == "width":
        return PrincipalSegment(ImagePoint(box.x0, box.cy), ImagePoint(box.x1, box.cy))
    if mode == "height":
        return PrincipalSegment(ImagePoint(box.cx, box.y0), ImagePoint(box.cx, box.y1))
    if mode == "diagonal":
        return PrincipalSegment(ImagePoint(box.x0, box.y0), ImagePoint(box.x1, box.y1))
    raise ValueError(f"unknown baseline mode {mode!r}; expected one of {BASELINES}")


def segment_for_strategy(strategy: str, box: BoundingBox, mask: ForegroundMask | None = None) -> PrincipalSegment:
    """Dispatch on a strategy name; ``mask`` is required only for ``"pca"``."""
    if strategy == "pca":
        if mask is None:
            raise ValueError("the pca strategy needs a foreground mask")
        return estimate_principal_segment(mask, box)
    return baseline_segment(box, strategy)
