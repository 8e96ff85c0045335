"""Tracking accuracy (MOTA) and 3D trajectory error (MAE / RMSE)."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import partial

import numpy as np

from .errors import EmptyGroundTruthError, NoOverlapError
from .pipeline import reconstruct_sequence
from .reconstruction import SpecDatabase, Trajectory3D
from .rotation2d import STRATEGIES
from .tracking import Track, iou

REPORT_NOTE = (
    "Errors are Euclidean position errors in millimetres, camera coordinates, "
    "against simulator ground truth. Absolute values depend on the scene "
    "geometry; compare strategies by ordering."
)


@dataclass(frozen=True)
class MotaReport:
    mota: float
    fn: int
    fp: int
    id_switches: int
    gt_count: int


@dataclass(frozen=True)
class TrajectoryErrorReport:
    mae_mm: float
    rmse_mm: float
    matched_frames: int


def _per_frame(tracks) -> dict[int, list[tuple[int, object]]]:
    frames: dict[int, list] = {}
    for t in tracks:
        for frame, box in t.states:
            frames.setdefault(frame, []).append((t.id, box))
    return frames


def mota(gt: list[Track], pred: list[Track], iou_threshold: float = 0.5) -> MotaReport:
    """CLEAR-MOT accuracy ``1 - (FN + FP + IDs) / GT`` summed over frames.

    Each frame, ground-truth and predicted boxes are matched greedily by
    descending IoU (ties by gt id, then predicted id) above ``iou_threshold``.
    An identity switch is counted whenever a ground-truth track is matched to
    a different predicted id than at its most recent match.
    """
    gt_frames = _per_frame(gt)
    pred_frames = _per_frame(pred)
    gt_count = sum(len(v) for v in gt_frames.values())
    if gt_count == 0:
        raise EmptyGroundTruthError("MOTA needs at least one ground-truth box")
    fn = fp = ids = 0
    last_match: dict[int, int] = {}
    for frame in sorted(set(gt_frames) | set(pred_frames)):
        g = gt_frames.get(frame, [])
        p = pred_frames.get(frame, [])
        pairs = []
        for gid, gbox in g:
            for pid, pbox in p:
                score = iou(gbox, pbox)
                if score >= iou_threshold and score > 0:
                    pairs.append((-score, gid, pid))
        pairs.sort()
        matched_g, matched_p = set(), set()
        for _, gid, pid in pairs:
            if gid in matched_g or pid in matched_p:
                continue
            matched_g.add(gid)
            matched_p.add(pid)
            if gid in last_match and last_match[gid] != pid:
                ids += 1
            last_match[gid] = pid
        fn += len(g) - len(matched_g)
        fp += len(p) - len(matched_p)
    return MotaReport(1.0 - (fn + fp + ids) / gt_count, fn, fp, ids, gt_count)


def _frame_errors(gt: Trajectory3D, pred: Trajectory3D) -> np.ndarray:
    gt_pos = {p.frame: p.position for p in gt.points}
    errors = [np.linalg.norm(p.position - gt_pos[p.frame]) for p in pred.points if p.frame in gt_pos]
    return np.asarray(errors, dtype=float)


def _report(errors: np.ndarray) -> TrajectoryErrorReport:
    if errors.size == 0:
        raise NoOverlapError("trajectories share no frames")
    return TrajectoryErrorReport(float(np.mean(errors)), float(math.sqrt(np.mean(errors**2))), int(errors.size))


def trajectory_error(gt: Trajectory3D, pred: Trajectory3D) -> TrajectoryErrorReport:
    """MAE and RMSE of the per-frame Euclidean position error over common frames."""
    return _report(_frame_errors(gt, pred))


def match_trajectories(gt: list[Trajectory3D], pred: list[Trajectory3D]) -> list[tuple[Trajectory3D, Trajectory3D]]:
    """Pair predicted with ground-truth trajectories.

    Identical ids pair first. Remaining predictions of the same class are
    assigned greedily by lowest MAE over their common frames.
    """
    pairs = []
    pred_by_id = {t.track_id: t for t in pred}
    used = set()
    unmatched_gt = []
    for g in gt:
        p = pred_by_id.get(g.track_id)
        if p is not None and p.drone_class == g.drone_class and _frame_errors(g, p).size:
            pairs.append((g, p))
            used.add(p.track_id)
        else:
            unmatched_gt.append(g)
    candidates = []
    for g in unmatched_gt:
        for p in pred:
            if p.track_id in used or p.drone_class != g.drone_class:
                continue
            errors = _frame_errors(g, p)
            if errors.size:
                candidates.append((float(errors.mean()), g.track_id, p.track_id, g, p))
    candidates.sort(key=lambda c: c[:3])
    taken_gt = set()
    for _, gid, pid, g, p in candidates:
        if gid in taken_gt or pid in used:
            continue
        pairs.append((g, p))
        taken_gt.add(gid)
        used.add(pid)
    return pairs


def sequence_error(gt: list[Trajectory3D], pred: list[Trajectory3D]) -> TrajectoryErrorReport:
    """Error pooled over all frames of all matched trajectories in a sequence."""
    pairs = match_trajectories(gt, pred)
    errors = np.concatenate([_frame_errors(g, p) for g, p in pairs]) if pairs else np.zeros(0)
    return _report(errors)


def _evaluate_sequence(sequence, strategies, window, specs):
    gt = sequence.gt_trajectories()
    smoothed, raw = {}, {}
    for strategy in strategies:
        result = reconstruct_sequence(sequence, strategy, window, specs)
        smoothed[strategy] = asdict(sequence_error(gt, result.trajectories))
        raw[strategy] = asdict(sequence_error(gt, result.raw))
    return sequence.name, smoothed, raw


def _average(per_sequence: dict[str, dict[str, dict]], strategies) -> dict[str, dict]:
    out = {}
    for s in strategies:
        rows = [per_sequence[name][s] for name in per_sequence]
        out[s] = {
            "mae_mm": float(np.mean([r["mae_mm"] for r in rows])),
            "rmse_mm": float(np.mean([r["rmse_mm"] for r in rows])),
        }
    return out


def compare_strategies(
    sequences,
    strategies=STRATEGIES,
    window: int = 5,
    specs: SpecDatabase | None = None,
    jobs: int = 1,
) -> dict:
    """Run the reconstruction once per strategy on every sequence.

    Returns a JSON-ready report with per-sequence ``{strategy: {mae_mm,
    rmse_mm, matched_frames}}`` for smoothed trajectories, the same for raw
    trajectories, and the unweighted mean over sequences. Sequences are
    reported in name order regardless of ``jobs``.
    """
    strategies = tuple(strategies)
    for s in strategies:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}")
    sequences = list(sequences)
    if jobs > 1 and len(sequences) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(partial(_evaluate_sequence, strategies=strategies, window=window, specs=specs), sequences))
    else:
        results = [_evaluate_sequence(seq, strategies, window, specs) for seq in sequences]
    results.sort(key=lambda r: r[0])
    smoothed = {name: s for name, s, _ in results}
    raw = {name: r for name, _, r in results}
    return {
        "note": REPORT_NOTE,
        "window": window,
        "strategies": list(strategies),
        "sequences": smoothed,
        "average": _average(smoothed, strategies),
        "raw": {"sequences": raw, "average": _average(raw, strategies)},
    }


def format_table(report: dict) -> str:
    """One row per strategy: MAE for each sequence, then the averages (mm)."""
    strategies = report["strategies"]
    names = list(report["sequences"])
    cols = [*names, "avg MAE", "avg RMSE"]
    width = max(10, *(len(c) + 1 for c in cols))
    head = f"{'strategy':<10}" + "".join(f"{c:>{width}}" for c in cols)
    lines = [head, "-" * len(head)]
    for s in strategies:
        cells = [report["sequences"][n][s]["mae_mm"] for n in names]
        cells += [report["average"][s]["mae_mm"], report["average"][s]["rmse_mm"]]
        lines.append(f"{s:<10}" + "".join(f"{v:>{width}.2f}" for v in cells))
    return "\n".join(lines)
