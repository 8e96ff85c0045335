"""Read a scenario directory written by :func:`monotraj.simulator.generate_scenario`.

:class:`DatasetDirectory` exposes the same interface as
:class:`~monotraj.simulator.SimulatedScenario`, so the pipeline and metrics
work on either.
"""

from __future__ import annotations

import json
from functools import cached_property
from pathlib import Path

from .camera import load_camera
from .errors import IoFailureError
from .formats import parse_mask_filename, read_detections, read_gt_boxes, read_gt_trajectory, read_pgm
from .reconstruction import SpecDatabase, Trajectory3D, default_spec_database
from .rotation2d import ForegroundMask
from .tracking import Detection, Track

CAMERA_FILE = "camera.json"
GT_BOXES_FILE = "gt_boxes.csv"
GT_TRAJECTORY_FILE = "gt_trajectory.csv"
DETECTIONS_FILE = "detections.csv"
MANIFEST_FILE = "manifest.json"
CONFIG_FILE = "config.json"


def is_dataset_dir(path) -> bool:
    return (Path(path) / CAMERA_FILE).is_file()


def find_datasets(path) -> list[Path]:
    """``path`` itself if it is a dataset, otherwise its dataset subdirectories (sorted)."""
    path = Path(path)
    if is_dataset_dir(path):
        return [path]
    if not path.is_dir():
        return []
    return sorted(p for p in path.iterdir() if p.is_dir() and is_dataset_dir(p))


class DatasetDirectory:
    def __init__(self, path, specs: SpecDatabase | None = None):
        self.path = Path(path)
        self.specs = specs if specs is not None else default_spec_database()
        camera = self.path / CAMERA_FILE
        if not camera.is_file():
            raise IoFailureError(camera, "camera file not found")
        self.intrinsics, self.extrinsics = load_camera(camera)
        self.name = self.path.name
        self.image_size = None
        meta = self.path / MANIFEST_FILE
        if not meta.is_file():
            meta = self.path / CONFIG_FILE
        if meta.is_file():
            try:
                data = json.loads(meta.read_text())
            except (OSError, json.JSONDecodeError):
                data = {}
            self.name = data.get("name", self.name)
            if "image_size" in data:
                self.image_size = tuple(data["image_size"])

    def _require(self, name) -> Path:
        path = self.path / name
        if not path.is_file():
            raise IoFailureError(path, "file not found")
        return path

    def gt_tracks(self) -> list[Track]:
        return read_gt_boxes(self._require(GT_BOXES_FILE))

    def gt_trajectories(self) -> list[Trajectory3D]:
        return read_gt_trajectory(self._require(GT_TRAJECTORY_FILE), self.specs)

    def detections(self) -> dict[int, list[Detection]]:
        return read_detections(self._require(DETECTIONS_FILE))

    @cached_property
    def _mask_index(self) -> dict[int, dict[int, Path]]:
        index: dict[int, dict[int, Path]] = {}
        mask_dir = self.path / "masks"
        if mask_dir.is_dir():
            for p in mask_dir.iterdir():
                key = parse_mask_filename(p.name)
                if key is not None:
                    index.setdefault(key[0], {})[key[1]] = p
        return index

    def mask_for(self, frame: int, track_id: int) -> ForegroundMask | None:
        path = self._mask_index.get(frame, {}).get(track_id)
        return read_pgm(path) if path is not None else None

    def frame_mask(self, frame: int) -> ForegroundMask | None:
        out = None
        for tid in sorted(self._mask_index.get(frame, {})):
            mask = self.mask_for(frame, tid)
            out = mask if out is None else out | mask
        return out
