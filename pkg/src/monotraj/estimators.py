"""scikit-learn compatible wrappers around the reconstruction steps.

The three transformers chain in a :class:`sklearn.pipeline.Pipeline`::

    pipe = make_pipeline(
        PrincipalSegmentEstimator(strategy="pca"),
        DronePositionEstimator(fx=3000, fy=3000, cx=319.5, cy=239.5, drone_class="Air2S"),
        TrajectorySmoother(window=5),
    )
    positions = pipe.fit_transform(list_of_mask_box_pairs)

Rows are frames of a single track, in frame order.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .camera import CameraIntrinsics, backproject
from .errors import DegenerateAngleError
from .reconstruction import check_window, default_spec_database, drone_position, moving_average
from .rotation2d import BASELINES, STRATEGIES, BoundingBox, baseline_segment, segment_for_strategy

_DEGENERATE = (ValueError, ArithmeticError)


def check_strategy(strategy, allowed=STRATEGIES) -> str:
    if strategy not in allowed:
        raise ValueError(f"strategy must be one of {allowed}, got {strategy!r}")
    return strategy


def check_segments(X) -> np.ndarray:
    """Validate an (n, 4) array of ``[u1, v1, u2, v2]`` rows."""
    X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan")
    if X.shape[1] != 4:
        raise ValueError(f"expected 4 columns [u1, v1, u2, v2], got {X.shape[1]}")
    return X


def check_positions(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan", ensure_min_samples=0)
    if X.shape[1] != 3:
        raise ValueError(f"expected 3 columns [x, y, z], got {X.shape[1]}")
    return X


def _split_sample(sample):
    """Accept ``(mask, box)``, ``box``, or a 4-sequence ``(cx, cy, w, h)``."""
    if isinstance(sample, BoundingBox):
        return None, sample
    if isinstance(sample, tuple) and len(sample) == 2 and isinstance(sample[1], BoundingBox):
        return sample
    return None, BoundingBox(*map(float, sample))


class PrincipalSegmentEstimator(TransformerMixin, BaseEstimator):
    """Turn (mask, box) samples into principal segments.

    Parameters
    ----------
    strategy : {"pca", "width", "height", "diagonal"}
    fallback : {"width", "height", "diagonal"} or None
        Baseline used when PCA is degenerate for a sample. With None the
        row is filled with NaN instead.
    """

    def __init__(self, strategy="pca", fallback="width"):
        self.strategy = strategy
        self.fallback = fallback

    def fit(self, X=None, y=None):
        check_strategy(self.strategy)
        if self.fallback is not None:
            check_strategy(self.fallback, BASELINES)
        self.n_features_out_ = 4
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        out = np.empty((len(X), 4))
        for i, sample in enumerate(X):
            mask, box = _split_sample(sample)
            try:
                out[i] = segment_for_strategy(self.strategy, box, mask).as_array()
            except _DEGENERATE:
                if self.fallback is None:
                    out[i] = np.nan
                else:
                    out[i] = baseline_segment(box, self.fallback).as_array()
        return out


class DronePositionEstimator(TransformerMixin, BaseEstimator):
    """Map principal segments to 3D camera-frame positions (mm).

    The drone width comes from ``width_mm`` when given, otherwise from the
    default specification database entry for ``drone_class``.
    Degenerate rows (coincident endpoint rays) become NaN.
    """

    def __init__(self, fx=1.0, fy=1.0, cx=0.0, cy=0.0, skew=0.0, drone_class=None, width_mm=None):
        self.fx = fx
        self.fy = fy
        self.cx = cx
        self.cy = cy
        self.skew = skew
        self.drone_class = drone_class
        self.width_mm = width_mm

    @classmethod
    def from_intrinsics(cls, intrinsics: CameraIntrinsics, **kwargs):
        return cls(intrinsics.fx, intrinsics.fy, intrinsics.cx, intrinsics.cy, intrinsics.skew, **kwargs)

    def fit(self, X=None, y=None):
        self.intrinsics_ = CameraIntrinsics(self.fx, self.fy, self.cx, self.cy, self.skew)
        if self.width_mm is not None:
            if not self.width_mm > 0:
                raise ValueError("width_mm must be positive")
            self.width_mm_ = float(self.width_mm)
        elif self.drone_class is not None:
            self.width_mm_ = default_spec_database()[self.drone_class].width_mm
        else:
            raise ValueError("set either width_mm or drone_class")
        return self

    def transform(self, X):
        check_is_fitted(self, "width_mm_")
        X = check_segments(X)
        out = np.full((X.shape[0], 3), np.nan)
        for i, (u1, v1, u2, v2) in enumerate(X):
            if np.isnan([u1, v1, u2, v2]).any():
                continue
            v_a = backproject(self.intrinsics_, (u1, v1))
            v_b = backproject(self.intrinsics_, (u2, v2))
            try:
                out[i] = drone_position(v_a, v_b, self.width_mm_)[0]
            except DegenerateAngleError:
                pass
        return out

    def score(self, X, y):
        """Negative mean Euclidean position error against ``y`` (n, 3)."""
        pred = self.transform(X)
        y = check_positions(y)
        return -float(np.nanmean(np.linalg.norm(pred - y, axis=1)))


class TrajectorySmoother(TransformerMixin, BaseEstimator):
    """Centred moving average over consecutive rows; ends use truncated windows."""

    def __init__(self, window=5):
        self.window = window

    def fit(self, X=None, y=None):
        self.window_ = check_window(self.window)
        return self

    def transform(self, X):
        check_is_fitted(self, "window_")
        return moving_average(check_positions(X), self.window_)
