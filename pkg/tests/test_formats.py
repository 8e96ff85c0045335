import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from monotraj.dataset import DatasetDirectory, find_datasets
from monotraj.errors import FormatError, IoFailureError
from monotraj.formats import (
    decode_pgm,
    encode_pgm,
    mask_filename,
    parse_mask_filename,
    read_detections,
    read_gt_trajectory,
    read_tracks,
    read_trajectories,
    write_detections,
    write_tracks,
    write_trajectories,
)
from monotraj.pipeline import reconstruct_sequence
from monotraj.reconstruction import Trajectory3D, TrajectoryPoint3D
from monotraj.rotation2d import BoundingBox, ForegroundMask
from monotraj.tracking import Detection, Track


@given(arrays(bool, st.tuples(st.integers(1, 12), st.integers(1, 12))))
def test_pgm_round_trip(bits):
    m = ForegroundMask(bits)
    data = encode_pgm(m)
    assert data.startswith(b"P5\n")
    assert set(data[-bits.size :]) <= {0, 255}
    assert np.array_equal(decode_pgm(data).bits, bits)


def test_pgm_header_comments_and_nonzero_foreground():
    data = b"P5\n# written by hand\n3 1\n# max\n255\n" + bytes([0, 7, 255])
    assert decode_pgm(data).bits.tolist() == [[False, True, True]]


@pytest.mark.parametrize("data", [b"P2\n1 1\n255\n0", b"P5\n2 2\n255\n\x00", b"P5\n2", b"P5\n1 1\n65535\n\x00\x00"])
def test_pgm_malformed(data):
    with pytest.raises(FormatError):
        decode_pgm(data)


def test_mask_names():
    assert mask_filename(12, 3) == "frame12_id3.pgm"
    assert parse_mask_filename("frame12_id3.pgm") == (12, 3)
    assert parse_mask_filename("frame12.pgm") is None


def test_detection_csv_round_trip(tmp_path):
    dets = {0: [Detection(0, 1.5, 2.25, 3.0, 4.0, "Tello", 0.75)], 2: [Detection(2, 0.1, 0.2, 0.3, 0.4, "Mini3")]}
    path = tmp_path / "d.csv"
    write_detections(path, dets)
    assert path.read_text().splitlines()[0] == "frame,cx,cy,w,h,class,score"
    assert read_detections(path) == dets


def test_track_csv_round_trip_sorted_by_frame_then_id(tmp_path):
    a, b = Track(2, "Air2S"), Track(1, "Tello")
    a.append(0, BoundingBox(1, 2, 3, 4))
    a.append(1, BoundingBox(1.1, 2, 3, 4))
    b.append(1, BoundingBox(9, 9, 2, 2))
    path = tmp_path / "t.csv"
    write_tracks(path, [a, b])
    lines = path.read_text().splitlines()
    assert lines[0] == "frame,id,cx,cy,w,h,class"
    assert [l.split(",")[:2] for l in lines[1:]] == [["0", "2"], ["1", "1"], ["1", "2"]]
    assert [(t.id, t.states) for t in read_tracks(path)] == [(1, b.states), (2, a.states)]


def test_trajectory_csv_round_trip(tmp_path):
    t = Trajectory3D(4, "Mavic3", [TrajectoryPoint3D(3, np.array([1.0, -2.0, 3000.1]), 3000.2, 0.1)])
    path = tmp_path / "traj.csv"
    write_trajectories(path, [t])
    assert path.read_text().splitlines()[0] == "frame,id,class,x_mm,y_mm,z_mm,distance_mm,theta_rad"
    (back,) = read_trajectories(path)
    assert back.track_id == 4 and back.drone_class == "Mavic3"
    assert back.points[0].position.tolist() == [1.0, -2.0, 3000.1]
    assert (back.points[0].distance_mm, back.points[0].theta_rad) == (3000.2, 0.1)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("frame,id,class,x_mm\n", "missing column"),
        ("frame,id,class,x_mm,y_mm,z_mm\n0,1,Air2S,a,2,3\n", "bad x_mm"),
        ("frame,id,class,x_mm,y_mm,z_mm\n0,1,Air2S,1,2,nan\n", "non-finite"),
        ("frame,id,class,x_mm,y_mm,z_mm\n0,1,Air2S,1,2,3\n0,1,Air2S,1,2,3\n", "two rows"),
        ("frame,id,class,x_mm,y_mm,z_mm\n0,1,Air2S,1,2,3\n1,1,Tello,1,2,3\n", "changes class"),
    ],
)
def test_trajectory_csv_errors(tmp_path, text, needle):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(FormatError, match=needle):
        read_gt_trajectory(path)


def test_missing_file_is_io_failure(tmp_path):
    with pytest.raises(IoFailureError):
        read_tracks(tmp_path / "nope.csv")


# -- dataset directories ------------------------------------------------------------------


def test_find_datasets(seq_dataset, tmp_path):
    assert [p.name for p in find_datasets(seq_dataset)] == ["seq01", "seq04"]
    assert find_datasets(seq_dataset / "seq01") == [seq_dataset / "seq01"]
    assert find_datasets(tmp_path) == []


def test_dataset_matches_in_memory_scenario(seq_dataset, scenarios):
    disk = DatasetDirectory(seq_dataset / "seq04")
    mem = scenarios["seq04"]
    assert disk.name == "seq04" and disk.image_size == (640, 480)
    assert disk.intrinsics == mem.intrinsics
    assert [t.states for t in disk.gt_tracks()] == [t.states for t in mem.gt_tracks()]
    assert np.array_equal(disk.mask_for(30, 2).bits, mem.mask_for(30, 2).bits)
    assert np.array_equal(disk.frame_mask(30).bits, mem.frame_mask(30).bits)
    assert disk.mask_for(999, 1) is None
    a = reconstruct_sequence(disk)
    b = reconstruct_sequence(mem)
    for x, y in zip(a.trajectories, b.trajectories):
        assert np.array_equal(x.positions, y.positions)


def test_dataset_requires_camera(tmp_path):
    with pytest.raises(IoFailureError):
        DatasetDirectory(tmp_path)


def test_dataset_missing_gt_file(seq_dataset, tmp_path):
    import shutil

    copy = tmp_path / "seq01"
    shutil.copytree(seq_dataset / "seq01", copy)
    (copy / "gt_trajectory.csv").unlink()
    with pytest.raises(IoFailureError, match="gt_trajectory.csv"):
        DatasetDirectory(copy).gt_trajectories()
