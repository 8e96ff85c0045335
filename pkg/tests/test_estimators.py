import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from monotraj.camera import CameraIntrinsics, project
from monotraj.estimators import DronePositionEstimator, PrincipalSegmentEstimator, TrajectorySmoother
from monotraj.pipeline import reconstruct_sequence
from monotraj.rotation2d import BoundingBox, ForegroundMask


def test_pipeline_reproduces_reconstruct_sequence(scenarios):
    seq = scenarios["seq01"]
    (track,) = seq.gt_tracks()
    X = [(seq.mask_for(f, track.id), box) for f, box in track.states]
    pipe = make_pipeline(
        PrincipalSegmentEstimator("pca"),
        DronePositionEstimator.from_intrinsics(seq.intrinsics, drone_class=track.drone_class),
        TrajectorySmoother(5),
    )
    got = pipe.fit_transform(X)
    want = reconstruct_sequence(seq, "pca", window=5).trajectories[0].positions
    np.testing.assert_array_equal(got, want)


def test_params_and_clone():
    est = DronePositionEstimator(fx=2.0, drone_class="Tello")
    assert est.get_params()["fx"] == 2.0
    c = clone(est.set_params(fy=3.0))
    assert c.get_params()["fy"] == 3.0 and not hasattr(c, "width_mm_")


@pytest.mark.parametrize(
    "est",
    [
        PrincipalSegmentEstimator(),
        DronePositionEstimator(width_mm=100),
        TrajectorySmoother(),
    ],
)
def test_transform_before_fit(est):
    with pytest.raises(NotFittedError):
        est.transform(np.zeros((1, 4)))


@pytest.mark.parametrize(
    "est",
    [
        PrincipalSegmentEstimator(strategy="area"),
        PrincipalSegmentEstimator(fallback="pca"),
        DronePositionEstimator(),
        DronePositionEstimator(width_mm=-1),
        TrajectorySmoother(window=4),
        TrajectorySmoother(window=0),
    ],
)
def test_invalid_params_fail_at_fit(est):
    with pytest.raises(ValueError):
        est.fit()


def test_unknown_class_fails_at_fit():
    with pytest.raises(KeyError):
        DronePositionEstimator(drone_class="Phantom").fit()


def test_segment_fallback_and_nan():
    box = BoundingBox(10, 10, 8, 4)
    empty = ForegroundMask(np.zeros((20, 20), bool))
    width = PrincipalSegmentEstimator(fallback="width").fit().transform([(empty, box)])
    np.testing.assert_allclose(width, [[6, 10, 14, 10]])
    nan = PrincipalSegmentEstimator(fallback=None).fit().transform([(empty, box)])
    assert np.isnan(nan).all()


def test_plain_boxes_are_accepted_for_baselines():
    out = PrincipalSegmentEstimator("diagonal").fit().transform([(10, 10, 8, 4), BoundingBox(0, 0, 2, 2)])
    np.testing.assert_allclose(out, [[6, 8, 14, 12], [-1, -1, 1, 1]])


def test_position_estimator_and_score():
    k = CameraIntrinsics(1000, 1000, 320, 240)
    truth = np.array([[100.0, -50.0, 5000.0], [0.0, 0.0, 8000.0]])
    half = np.array([125.0, 0, 0])
    segs = np.array([[*project(k, p - half), *project(k, p + half)] for p in truth])
    est = DronePositionEstimator.from_intrinsics(k, width_mm=250.0).fit()
    # the segment is not perpendicular to the line of sight for the first row, so allow 0.1%
    np.testing.assert_allclose(est.transform(segs), truth, rtol=1e-3, atol=1.0)
    assert -est.score(segs, truth) < 5.0


def test_position_estimator_degenerate_and_nan_rows():
    est = DronePositionEstimator(width_mm=100).fit()
    out = est.transform([[1, 1, 1, 1], [np.nan, 0, 0, 0]])
    assert np.isnan(out).all()


def test_bad_column_counts():
    with pytest.raises(ValueError):
        DronePositionEstimator(width_mm=100).fit().transform(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        TrajectorySmoother().fit().transform(np.zeros((2, 4)))


def test_smoother_matches_truncated_average():
    x = np.arange(5.0)[:, None] * np.ones(3)
    out = TrajectorySmoother(3).fit_transform(x)
    np.testing.assert_allclose(out[:, 0], [0.5, 1, 2, 3, 3.5])
    np.testing.assert_array_equal(TrajectorySmoother(1).fit_transform(x), x)
