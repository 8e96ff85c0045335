import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monotraj.rotation2d import BoundingBox
from monotraj.tracking import Detection, DetectorNoiseModel, Track, associate, iou, simulate_detector

boxes = st.builds(
    BoundingBox,
    st.floats(0, 200),
    st.floats(0, 200),
    st.floats(0.5, 80),
    st.floats(0.5, 80),
)


def det(frame, cx, cy, w=10.0, h=10.0, cls="Air2S"):
    return Detection(frame, cx, cy, w, h, cls)


# -- iou -----------------------------------------------------------------------------


def test_iou_identical():
    b = BoundingBox(5, 5, 3, 4)
    assert iou(b, b) == 1.0


def test_iou_disjoint():
    assert iou(BoundingBox(0, 0, 2, 2), BoundingBox(10, 0, 2, 2)) == 0.0


def test_iou_half_overlap():
    assert iou(BoundingBox(0, 0, 2, 2), BoundingBox(1, 0, 2, 2)) == pytest.approx(1 / 3)


def test_iou_touching_edges_is_zero():
    assert iou(BoundingBox(0, 0, 2, 2), BoundingBox(2, 0, 2, 2)) == 0.0


@given(boxes, boxes)
def test_iou_symmetric_and_bounded(a, b):
    v = iou(a, b)
    assert v == iou(b, a)
    assert 0.0 <= v <= 1.0
    assert iou(a, a) == pytest.approx(1.0)


# -- types -----------------------------------------------------------------------------


@pytest.mark.parametrize("kwargs", [{"w": 0}, {"h": -1}, {"score": 1.5}, {"score": -0.1}])
def test_detection_invariants(kwargs):
    base = dict(frame=0, cx=0, cy=0, w=1, h=1, drone_class="Tello", score=0.5)
    base.update(kwargs)
    with pytest.raises(ValueError):
        Detection(**base)


def test_track_frames_strictly_increase():
    t = Track(1, "Tello")
    t.append(3, BoundingBox(0, 0, 1, 1))
    with pytest.raises(ValueError):
        t.append(3, BoundingBox(0, 0, 1, 1))
    with pytest.raises(ValueError):
        t.append(2, BoundingBox(0, 0, 1, 1))
    assert t.box_at(3) == BoundingBox(0, 0, 1, 1)
    assert t.box_at(4) is None


@pytest.mark.parametrize("kwargs", [{"miss_rate": 1.5}, {"fp_rate_per_frame": -1}, {"center_jitter_sigma": -0.1}])
def test_noise_model_invariants(kwargs):
    with pytest.raises(ValueError):
        DetectorNoiseModel(**kwargs)


# -- associate ------------------------------------------------------------------------------


def test_single_stream_is_one_track():
    tracks = associate([det(f, 100 + f, 50) for f in range(12)])
    assert len(tracks) == 1
    assert tracks[0].id == 1
    assert len(tracks[0]) == 12


def test_two_disjoint_streams():
    dets = [det(f, 20 + f, 20) for f in range(10)] + [det(f, 200 - f, 150) for f in range(10)]
    tracks = associate(dets)
    assert [len(t) for t in tracks] == [10, 10]
    for t in tracks:
        xs = [b.cx for _, b in t.states]
        assert xs == sorted(xs) or xs == sorted(xs, reverse=True)


def test_class_mismatch_never_associates():
    tracks = associate([det(0, 50, 50, cls="Tello"), det(1, 50, 50, cls="Mini3")])
    assert [(t.drone_class, len(t)) for t in tracks] == [("Tello", 1), ("Mini3", 1)]


def test_gap_longer_than_max_gap_starts_new_track():
    dets = [det(0, 50, 50), det(3, 50, 50), det(20, 50, 50)]
    tracks = associate(dets, max_gap=5)
    assert [t.frames for t in tracks] == [[0, 3], [20]]


def test_higher_iou_wins_contested_detection():
    # both tracks overlap the frame-1 detection; the closer one takes it
    dets = [det(0, 50, 50), det(0, 56, 50), det(1, 55, 50)]
    tracks = associate(dets, iou_threshold=0.3)
    assert tracks[1].frames == [0, 1]
    assert tracks[0].frames == [0]


def test_accepts_frame_mapping():
    per_frame = {0: [det(0, 5, 5)], 1: [det(1, 6, 5)]}
    assert len(associate(per_frame)) == 1


def test_crossing_drones_keep_identities(scenarios):
    seq = scenarios["seq04"]
    gt = {t.id: t for t in seq.gt_tracks()}
    tracks = associate(seq.detections())
    assert len(tracks) == 2
    for t in tracks:
        g = gt[t.id]
        assert t.drone_class == g.drone_class
        assert t.states == g.states


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 8), st.floats(0, 60), st.floats(0, 60)), max_size=40))
def test_one_detection_per_frame_per_track(raw):
    tracks = associate([det(f, x, y) for f, x, y in raw], iou_threshold=0.1)
    for t in tracks:
        assert len(set(t.frames)) == len(t.frames)
    assert sum(len(t) for t in tracks) == len(raw)


# -- simulate_detector --------------------------------------------------------------------


def _gt(n_frames=20, per_frame=2):
    return {f: [(BoundingBox(50 + 100 * k, 60 + f, 30, 12), "Mini3") for k in range(per_frame)] for f in range(n_frames)}


def test_zero_noise_reproduces_ground_truth():
    gt = _gt()
    out = simulate_detector(gt, DetectorNoiseModel())
    for f, items in gt.items():
        assert [(d.box, d.drone_class, d.score) for d in out[f]] == [(b, c, 1.0) for b, c in items]


def test_full_miss_rate_drops_everything():
    out = simulate_detector(_gt(), DetectorNoiseModel(miss_rate=1.0))
    assert all(v == [] for v in out.values())
    assert set(out) == set(range(20))


def test_miss_count_is_binomial():
    gt = _gt(n_frames=500, per_frame=2)  # 1000 boxes
    out = simulate_detector(gt, DetectorNoiseModel(miss_rate=0.1, rng_seed=7))
    dropped = 1000 - sum(len(v) for v in out.values())
    assert abs(dropped - 100) <= 3 * math.sqrt(1000 * 0.1 * 0.9)


def test_same_seed_is_bit_identical():
    noise = DetectorNoiseModel(0.2, 0.5, 1.0, 0.05, rng_seed=3)
    assert simulate_detector(_gt(), noise) == simulate_detector(_gt(), noise)
    other = DetectorNoiseModel(0.2, 0.5, 1.0, 0.05, rng_seed=4)
    assert simulate_detector(_gt(), noise) != simulate_detector(_gt(), other)


def test_false_positives_fall_inside_image():
    out = simulate_detector(_gt(50), DetectorNoiseModel(fp_rate_per_frame=2.0, rng_seed=1), image_size=(320, 240))
    fps = [d for v in out.values() for d in v if d.score < 1.0]
    assert fps
    assert all(0 <= d.cx <= 320 and 0 <= d.cy <= 240 and 0.3 <= d.score <= 1.0 for d in fps)
