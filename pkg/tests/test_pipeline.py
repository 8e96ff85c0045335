import numpy as np
import pytest

from monotraj.pipeline import reconstruct_sequence
from monotraj.reconstruction import default_spec_database
from monotraj.rotation2d import STRATEGIES
from monotraj.tracking import Track


def test_gt_mode_reconstructs_every_frame(scenarios):
    r = reconstruct_sequence(scenarios["seq05"])
    assert [(t.track_id, len(t)) for t in r.trajectories] == [(1, 180), (2, 180)]
    assert [len(t) for t in r.raw] == [180, 180]
    assert r.skipped == {}


def test_tracker_mode_matches_gt_mode_without_noise(scenarios):
    seq = scenarios["seq04"]
    gt_mode = reconstruct_sequence(seq, mode="gt")
    tracker_mode = reconstruct_sequence(seq, mode="tracker")
    assert [t.track_id for t in tracker_mode.trajectories] == [1, 2]
    # union masks clipped to each box give the same PCA axis unless the drones overlap
    for a, b in zip(gt_mode.trajectories, tracker_mode.trajectories):
        err = np.linalg.norm(a.positions - b.positions, axis=1)
        assert np.median(err) == 0.0


def test_unknown_class_is_skipped_not_fatal(scenarios):
    seq = scenarios["seq04"]
    specs = default_spec_database()
    del specs["Tello"]
    r = reconstruct_sequence(seq, specs=specs)
    assert [t.drone_class for t in r.trajectories] == ["Air2S"]
    assert "Tello" in r.skipped[2]


def test_explicit_tracks(scenarios):
    seq = scenarios["seq01"]
    t = Track(5, "Air2S")
    for frame, box in seq.gt_tracks()[0].states[:10]:
        t.append(frame, box)
    # pass masks by track id 5 -> none found -> width fallback for every frame
    r = reconstruct_sequence(seq, strategy="pca", tracks=[t])
    w = reconstruct_sequence(seq, strategy="width", tracks=[t])
    np.testing.assert_array_equal(r.raw[0].positions, w.raw[0].positions)


@pytest.mark.parametrize("strategy", ["area", "PCA"])
def test_bad_strategy(scenarios, strategy):
    with pytest.raises(ValueError):
        reconstruct_sequence(scenarios["seq01"], strategy=strategy)


def test_bad_mode(scenarios):
    with pytest.raises(ValueError):
        reconstruct_sequence(scenarios["seq01"], mode="oracle")


def test_pca_equals_width_on_unrotated_side_view(scenarios):
    """With no rotation the mask's major axis is horizontal, so PCA picks the width segment."""
    seq = scenarios["seq02"]
    a = reconstruct_sequence(seq, "pca").raw[0].positions
    b = reconstruct_sequence(seq, "width").raw[0].positions
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_strategies_give_distinct_trajectories(scenarios):
    out = {s: reconstruct_sequence(scenarios["seq08"], s).trajectories[0].positions for s in STRATEGIES}
    for a in STRATEGIES:
        for b in STRATEGIES:
            if a < b:
                assert not np.allclose(out[a], out[b])
