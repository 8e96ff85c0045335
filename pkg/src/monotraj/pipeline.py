"""Tracks + masks -> segments -> 3D trajectories for a whole sequence."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import UnknownClassError
from .reconstruction import SpecDatabase, Trajectory3D, default_spec_database, reconstruct_track, smooth, track_segments
from .rotation2d import STRATEGIES
from .tracking import Track, associate

logger = logging.getLogger(__name__)

MODES = ("gt", "tracker")


@dataclass
class ReconstructionResult:
    trajectories: list[Trajectory3D] = field(default_factory=list)
    raw: list[Trajectory3D] = field(default_factory=list)
    skipped: dict[int, str] = field(default_factory=dict)
    tracks: list[Track] = field(default_factory=list)


def sequence_tracks(sequence, mode: str = "gt", iou_threshold: float = 0.5, max_gap: int = 10) -> list[Track]:
    """Ground-truth tracks, or tracks built by associating the sequence's detections."""
    if mode == "gt":
        return sequence.gt_tracks()
    if mode == "tracker":
        return associate(sequence.detections(), iou_threshold=iou_threshold, max_gap=max_gap)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def reconstruct_sequence(
    sequence,
    strategy: str = "pca",
    window: int = 5,
    specs: SpecDatabase | None = None,
    mode: str = "gt",
    iou_threshold: float = 0.5,
    max_gap: int = 10,
    tracks: list[Track] | None = None,
) -> ReconstructionResult:
    """Reconstruct and smooth every track of a sequence.

    In ``gt`` mode each track reads its own drone mask; in ``tracker`` mode
    track ids are arbitrary, so the union of all foreground in the frame is
    used (PCA clips it to the track box anyway).

    Tracks whose class is missing from ``specs`` are skipped and reported in
    ``result.skipped``.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    specs = specs if specs is not None else default_spec_database()
    if tracks is None:
        tracks = sequence_tracks(sequence, mode, iou_threshold, max_gap)
    result = ReconstructionResult(tracks=tracks)
    for track in tracks:
        if track.drone_class not in specs:
            result.skipped[track.id] = str(UnknownClassError(track.drone_class))
            logger.warning("track %d skipped: %s", track.id, result.skipped[track.id])
            continue
        if mode == "gt":
            masks = lambda frame, box, tid=track.id: sequence.mask_for(frame, tid)  # noqa: E731
        else:
            masks = lambda frame, box: sequence.frame_mask(frame)  # noqa: E731
        segments = track_segments(track, strategy, masks if strategy == "pca" else None)
        raw = reconstruct_track(track, segments, sequence.intrinsics, specs)
        result.raw.append(raw)
        result.trajectories.append(smooth(raw, window))
    return result
