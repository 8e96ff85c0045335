"""Detections, greedy IoU association, and a simulated noisy detector."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rotation2d import BoundingBox

DRONE_CLASSES = ("Air2S", "Mavic3", "Mini3", "Tello")


@dataclass(frozen=True)
class Detection:
    frame: int
    cx: float
    cy: float
    w: float
    h: float
    drone_class: str
    score: float = 1.0

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError("detection size must be positive")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")

    @property
    def box(self) -> BoundingBox:
        return BoundingBox(self.cx, self.cy, self.w, self.h)


@dataclass
class Track:
    """One identity over its lifetime: an ordered list of (frame, box) states."""

    id: int
    drone_class: str
    states: list[tuple[int, BoundingBox]] = field(default_factory=list)

    def append(self, frame: int, box: BoundingBox):
        if self.states and frame <= self.states[-1][0]:
            raise ValueError(f"track {self.id}: frame {frame} does not follow {self.states[-1][0]}")
        self.states.append((frame, box))

    @property
    def frames(self) -> list[int]:
        return [f for f, _ in self.states]

    @property
    def last_frame(self) -> int:
        return self.states[-1][0]

    @property
    def last_box(self) -> BoundingBox:
        return self.states[-1][1]

    def box_at(self, frame: int) -> BoundingBox | None:
        for f, box in self.states:
            if f == frame:
                return box
        return None

    def __len__(self):
        return len(self.states)


@dataclass(frozen=True)
class DetectorNoiseModel:
    miss_rate: float = 0.0
    fp_rate_per_frame: float = 0.0
    center_jitter_sigma: float = 0.0
    size_jitter_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.miss_rate <= 1.0:
            raise ValueError("miss_rate must lie in [0, 1]")
        for name in ("fp_rate_per_frame", "center_jitter_sigma", "size_jitter_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def iou(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x1, b.x1) - max(a.x0, b.x0)
    ih = min(a.y1, b.y1) - max(a.y0, b.y0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    # areas from the same corner arithmetic, so iou(a, a) is exactly 1
    area_a = (a.x1 - a.x0) * (a.y1 - a.y0)
    area_b = (b.x1 - b.x0) * (b.y1 - b.y0)
    return min(1.0, inter / (area_a + area_b - inter))


def group_by_frame(detections) -> dict[int, list[Detection]]:
    frames: dict[int, list[Detection]] = {}
    for det in detections:
        frames.setdefault(det.frame, []).append(det)
    return frames


def associate(detections, iou_threshold: float = 0.5, max_gap: int = 10) -> list[Track]:
    """Greedy tracking-by-detection.

    Each frame, candidate (track, detection) pairs of the same class with
    IoU >= ``iou_threshold`` against the track's last box are accepted in order
    of decreasing IoU, then increasing track id. Unmatched detections open new
    tracks; a track is retired once it has gone ``max_gap`` frames unmatched.

    Args:
        detections: Either a flat iterable of :class:`Detection` or a mapping
            ``frame -> list[Detection]``.

    Returns:
        Tracks ordered by id (ids start at 1).
    """
    per_frame = detections if isinstance(detections, dict) else group_by_frame(detections)
    tracks: list[Track] = []
    active: list[Track] = []
    for frame in sorted(per_frame):
        dets = per_frame[frame]
        active = [t for t in active if frame - t.last_frame <= max_gap]
        candidates = []
        for t in active:
            for j, det in enumerate(dets):
                if det.drone_class != t.drone_class:
                    continue
                score = iou(t.last_box, det.box)
                if score >= iou_threshold and score > 0:
                    candidates.append((-score, t.id, j, t))
        candidates.sort(key=lambda c: c[:3])
        used_tracks, used_dets = set(), set()
        for _, tid, j, t in candidates:
            if tid in used_tracks or j in used_dets:
                continue
            t.append(frame, dets[j].box)
            used_tracks.add(tid)
            used_dets.add(j)
        for j, det in enumerate(dets):
            if j not in used_dets:
                t = Track(len(tracks) + 1, det.drone_class)
                t.append(frame, det.box)
                tracks.append(t)
                active.append(t)
    return tracks


def simulate_detector(
    gt: dict[int, list[tuple[BoundingBox, str]]],
    noise: DetectorNoiseModel,
    image_size: tuple[int, int] = (640, 480),
    fp_size_range: tuple[float, float] = (8.0, 64.0),
) -> dict[int, list[Detection]]:
    """Turn ground-truth boxes into noisy detections.

    Ground-truth boxes are dropped with probability ``miss_rate``; survivors get
    additive Gaussian centre noise and multiplicative log-normal size noise.
    A Poisson number of false positives, uniformly placed over the image, is
    appended to each frame. Draw order is fixed, so a seed reproduces the
    output exactly.

    Args:
        gt: ``frame -> [(box, class), ...]``.
        image_size: (width, height) used to place false positives.
    """
    rng = np.random.default_rng(noise.rng_seed)
    width, height = image_size
    out: dict[int, list[Detection]] = {}
    for frame in sorted(gt):
        dets = []
        for box, cls in gt[frame]:
            keep = rng.random() >= noise.miss_rate
            jitter = rng.normal(0.0, 1.0, size=4)
            if not keep:
                continue
            cx = box.cx + noise.center_jitter_sigma * jitter[0]
            cy = box.cy + noise.center_jitter_sigma * jitter[1]
            w = box.w * math.exp(noise.size_jitter_sigma * jitter[2])
            h = box.h * math.exp(noise.size_jitter_sigma * jitter[3])
            dets.append(Detection(frame, cx, cy, w, h, cls, 1.0))
        n_fp = int(rng.poisson(noise.fp_rate_per_frame)) if noise.fp_rate_per_frame > 0 else 0
        for _ in range(n_fp):
            w, h = rng.uniform(*fp_size_range, size=2)
            cx = rng.uniform(0, width)
            cy = rng.uniform(0, height)
            cls = DRONE_CLASSES[int(rng.integers(len(DRONE_CLASSES)))]
            score = float(rng.uniform(0.3, 1.0))
            dets.append(Detection(frame, float(cx), float(cy), float(w), float(h), cls, score))
        out[frame] = dets
    return out
