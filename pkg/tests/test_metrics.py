import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monotraj.errors import EmptyGroundTruthError, NoOverlapError
from monotraj.metrics import compare_strategies, format_table, match_trajectories, mota, sequence_error, trajectory_error
from monotraj.reconstruction import Trajectory3D, TrajectoryPoint3D
from monotraj.rotation2d import STRATEGIES, BoundingBox
from monotraj.tracking import Track


def make_track(tid, frames, x0=0.0, cls="Air2S", step=1.0):
    t = Track(tid, cls)
    for f in frames:
        t.append(f, BoundingBox(x0 + step * f, 50.0, 20.0, 10.0))
    return t


def make_traj(tid, positions, frames=None, cls="Air2S"):
    frames = range(len(positions)) if frames is None else frames
    t = Trajectory3D(tid, cls)
    for f, p in zip(frames, positions):
        p = np.asarray(p, dtype=float)
        t.points.append(TrajectoryPoint3D(f, p, float(np.linalg.norm(p)), 0.0))
    return t


# -- MOTA ------------------------------------------------------------------------------------


def test_mota_perfect():
    gt = [make_track(1, range(10)), make_track(2, range(10), x0=200)]
    r = mota(gt, gt)
    assert (r.mota, r.fn, r.fp, r.id_switches, r.gt_count) == (1.0, 0, 0, 0, 20)


def test_mota_one_miss_in_ten():
    gt = [make_track(1, range(10))]
    pred = [make_track(7, [f for f in range(10) if f != 4])]
    r = mota(gt, pred)
    assert (r.fn, r.fp, r.id_switches) == (1, 0, 0)
    assert r.mota == pytest.approx(0.9, abs=1e-15)


def test_mota_id_swap_counts_two_switches():
    a = make_track(1, range(10), x0=0)
    b = make_track(2, range(10), x0=200)
    # predicted ids swap at frame 5
    p1, p2 = Track(1, "Air2S"), Track(2, "Air2S")
    for f in range(10):
        (p1 if f < 5 else p2).append(f, a.box_at(f))
        (p2 if f < 5 else p1).append(f, b.box_at(f))
    r = mota([a, b], [p1, p2])
    assert (r.fn, r.fp, r.id_switches) == (0, 0, 2)
    assert r.mota == pytest.approx(1 - 2 / 20)


def test_mota_empty_ground_truth():
    with pytest.raises(EmptyGroundTruthError):
        mota([], [make_track(1, range(3))])


def test_mota_below_threshold_is_miss_plus_false_positive():
    gt = [make_track(1, [0])]
    pred = [Track(1, "Air2S")]
    pred[0].append(0, BoundingBox(15, 50, 20, 10))  # iou 1/7
    r = mota(gt, pred)
    assert (r.fn, r.fp) == (1, 1)
    assert r.mota == -1.0


@settings(max_examples=40)
@given(st.integers(0, 30), st.integers(0, 1000))
def test_mota_injected_false_positives(k, seed):
    gt = [make_track(1, range(20)), make_track(2, range(20), x0=300)]
    rng = np.random.default_rng(seed)
    extra = []
    for i in range(k):
        t = Track(100 + i, "Tello")
        t.append(int(rng.integers(0, 20)), BoundingBox(150, 400, 10, 10))
        extra.append(t)
    r = mota(gt, gt + extra)
    assert r.fp == k
    assert r.mota == 1 - k / 40


@settings(max_examples=40)
@given(st.permutations(list(range(1, 5))), st.integers(0, 9))
def test_mota_invariant_to_predicted_id_relabelling(perm, missing):
    gt = [make_track(i, range(12), x0=120 * i) for i in range(1, 5)]
    pred = [make_track(i, [f for f in range(12) if f != missing or i == 1], x0=120 * i) for i in range(1, 5)]
    relabelled = [make_track(perm[t.id - 1] + 10, t.frames, x0=120 * t.id) for t in pred]
    assert mota(gt, pred) == mota(gt, relabelled)


# -- trajectory error --------------------------------------------------------------------------


def test_identical_trajectories():
    t = make_traj(1, [(0, 0, 1000), (5, 5, 1100)])
    r = trajectory_error(t, t)
    assert (r.mae_mm, r.rmse_mm, r.matched_frames) == (0.0, 0.0, 2)


def test_constant_offset():
    g = make_traj(1, [(0, 0, 1000)] * 4)
    p = make_traj(1, [(3, 4, 1000)] * 4)
    r = trajectory_error(g, p)
    assert r.mae_mm == pytest.approx(5.0) and r.rmse_mm == pytest.approx(5.0)


def test_zero_and_ten():
    g = make_traj(1, [(0, 0, 1000), (0, 0, 1000)])
    p = make_traj(1, [(0, 0, 1000), (0, 10, 1000)])
    r = trajectory_error(g, p)
    assert r.mae_mm == pytest.approx(5.0)
    assert r.rmse_mm == pytest.approx(math.sqrt(50))


def test_only_common_frames_count():
    g = make_traj(1, [(0, 0, 1)] * 3, frames=[0, 1, 2])
    p = make_traj(1, [(0, 0, 2)] * 3, frames=[2, 3, 4])
    assert trajectory_error(g, p).matched_frames == 1


def test_no_overlap():
    with pytest.raises(NoOverlapError):
        trajectory_error(make_traj(1, [(0, 0, 1)], frames=[0]), make_traj(1, [(0, 0, 1)], frames=[5]))


pts = st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=20)


@given(pts, pts)
def test_error_properties(a, b):
    n = min(len(a), len(b))
    g, p = make_traj(1, a[:n]), make_traj(1, b[:n])
    r = trajectory_error(g, p)
    assert r.rmse_mm >= r.mae_mm - 1e-9 * max(1.0, r.mae_mm) >= -1e-9
    assert trajectory_error(p, g) == r


def test_rmse_equals_mae_iff_constant_error():
    g = make_traj(1, [(0, 0, 0)] * 3)
    assert trajectory_error(g, make_traj(1, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])).rmse_mm == pytest.approx(1.0)
    r = trajectory_error(g, make_traj(1, [(1, 0, 0), (2, 0, 0), (0, 0, 0)]))
    assert r.rmse_mm > r.mae_mm


# -- matching and pooling ------------------------------------------------------------------------


def test_matching_prefers_same_id_then_lowest_error():
    gt = [make_traj(1, [(0, 0, 1000)] * 3), make_traj(2, [(500, 0, 1000)] * 3)]
    pred = [make_traj(1, [(1, 0, 1000)] * 3), make_traj(9, [(510, 0, 1000)] * 3), make_traj(8, [(900, 0, 1000)] * 3)]
    pairs = [(g.track_id, p.track_id) for g, p in match_trajectories(gt, pred)]
    assert pairs == [(1, 1), (2, 9)]


def test_matching_respects_class():
    gt = [make_traj(1, [(0, 0, 1000)] * 3, cls="Tello")]
    pred = [make_traj(1, [(0, 0, 1000)] * 3, cls="Mini3")]
    assert match_trajectories(gt, pred) == []
    with pytest.raises(NoOverlapError):
        sequence_error(gt, pred)


def test_sequence_error_pools_frames():
    gt = [make_traj(1, [(0, 0, 0)] * 2), make_traj(2, [(100, 0, 0)] * 2)]
    pred = [make_traj(1, [(3, 4, 0)] * 2), make_traj(2, [(100, 0, 10)] * 2)]
    r = sequence_error(gt, pred)
    assert r.matched_frames == 4
    assert r.mae_mm == pytest.approx(7.5)


# -- strategy comparison -----------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_report(scenarios):
    return compare_strategies([scenarios["seq09"], scenarios["seq03"]], window=5)


def test_report_layout(small_report):
    r = small_report
    assert list(r["sequences"]) == ["seq03", "seq09"]
    assert r["strategies"] == list(STRATEGIES)
    for per in (r["sequences"]["seq03"], r["average"], r["raw"]["sequences"]["seq09"]):
        assert set(per) == set(STRATEGIES)
    for s in STRATEGIES:
        expected = np.mean([r["sequences"][n][s]["mae_mm"] for n in ("seq03", "seq09")])
        assert r["average"][s]["mae_mm"] == pytest.approx(expected)
    assert "ordering" in r["note"]


def test_report_orderings_on_rotating_sequence(small_report):
    seq09 = small_report["sequences"]["seq09"]
    assert seq09["pca"]["mae_mm"] < seq09["width"]["mae_mm"]
    assert min(seq09, key=lambda s: seq09[s]["mae_mm"]) == "pca"


def test_table_has_one_row_per_strategy(small_report):
    lines = format_table(small_report).splitlines()
    assert [l.split()[0] for l in lines[2:]] == list(STRATEGIES)


def test_parallel_merge_matches_serial(scenarios, small_report):
    par = compare_strategies([scenarios["seq03"], scenarios["seq09"]], window=5, jobs=2)
    assert par == small_report


def test_unknown_strategy():
    with pytest.raises(ValueError):
        compare_strategies([], strategies=("area",))
