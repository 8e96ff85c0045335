"""Deterministic synthetic drone scenarios.

Drones are rendered as oriented cuboids directly in camera coordinates (the
simulated camera has identity extrinsics). Body axes at zero rotation:

- body x: width, along camera x (image right)
- body y: height, along camera y (image down)
- body z: depth, along the optical axis

so an unrotated drone is seen side-on. Yaw turns the body about the vertical
(camera y) axis, pitch about body x, and roll about the depth axis, which for
an unrotated drone is an in-image-plane rotation. The body-to-camera rotation
is ``Ry(yaw) @ Rx(pitch) @ Rz(roll)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .camera import CameraIntrinsics, project_points, rotation_x, rotation_y, rotation_z, save_camera
from .errors import ConfigError, InvalidSpecError, IoFailureError, UnknownClassError
from .formats import mask_filename, write_detections, write_gt_boxes, write_gt_trajectory, write_pgm
from .reconstruction import DroneSpec, SpecDatabase, Trajectory3D, TrajectoryPoint3D, default_spec_database
from .rotation2d import BoundingBox, ForegroundMask, mask_bounding_box
from .tracking import DetectorNoiseModel, Detection, Track, simulate_detector

MOTION_KINDS = ("linear-axis", "linear-3d", "nonlinear", "nonlinear-rotating")
_AXES = {"x": 0, "y": 1, "z": 2}
_NEAR_PLANE_MM = 1.0

# 12 cuboid edges as index pairs into the corner list below.
_CORNER_SIGNS = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
_EDGES = [(i, j) for i in range(8) for j in range(i + 1, 8) if np.sum(_CORNER_SIGNS[i] != _CORNER_SIGNS[j]) == 1]


@dataclass(frozen=True, eq=False)
class MotionSpec:
    """How one drone moves through a scenario.

    Linear kinds interpolate ``start`` to ``end`` at constant velocity.
    Nonlinear kinds follow a cubic spline through ``control_points`` with a
    sinusoidal speed profile of relative amplitude ``speed_variation``.
    Only ``nonlinear-rotating`` uses the angular rates (rad/frame).
    """

    kind: str
    frames: int
    start: tuple | None = None
    end: tuple | None = None
    control_points: tuple | None = None
    axis: str | None = None
    yaw_rate: float = 0.0
    pitch_rate: float = 0.0
    roll_rate: float = 0.0
    speed_variation: float = 0.6

    def validate(self):
        if self.kind not in MOTION_KINDS:
            raise InvalidSpecError(f"unknown motion kind {self.kind!r}")
        if not isinstance(self.frames, int) or self.frames < 2:
            raise InvalidSpecError("frames must be an integer >= 2")
        if self.kind.startswith("linear"):
            if self.start is None or self.end is None:
                raise InvalidSpecError(f"{self.kind} motion needs start and end")
            start, end = _vec3(self.start, "start"), _vec3(self.end, "end")
            if self.kind == "linear-axis":
                if self.axis not in _AXES:
                    raise InvalidSpecError(f"linear-axis motion needs axis x, y or z, got {self.axis!r}")
                other = [i for i in range(3) if i != _AXES[self.axis]]
                if np.any(start[other] != end[other]):
                    raise InvalidSpecError(f"linear-axis motion along {self.axis} may not change other axes")
        else:
            points = self.control_points or ()
            if len(points) < 2:
                raise InvalidSpecError("nonlinear motion needs at least 2 control points")
            for i, p in enumerate(points):
                _vec3(p, f"control_points[{i}]")
            if not 0.0 <= self.speed_variation < 1.0:
                raise InvalidSpecError("speed_variation must lie in [0, 1)")
        if self.kind != "nonlinear-rotating" and (self.yaw_rate or self.pitch_rate or self.roll_rate):
            raise InvalidSpecError(f"{self.kind} motion cannot rotate")
        for name in ("yaw_rate", "pitch_rate", "roll_rate"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpecError(f"{name} must be finite")


def _vec3(value, name) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float).reshape(3)
    except (TypeError, ValueError):
        raise InvalidSpecError(f"{name} must be a 3-vector") from None
    if not np.all(np.isfinite(arr)):
        raise InvalidSpecError(f"{name} must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class DronePose:
    frame: int
    position: np.ndarray
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    @property
    def rotation(self) -> np.ndarray:
        return body_rotation(self.yaw, self.pitch, self.roll)


def body_rotation(yaw: float, pitch: float, roll: float) -> np.ndarray:
    return rotation_y(yaw) @ rotation_x(pitch) @ rotation_z(roll)


def generate_poses(spec: MotionSpec) -> list[DronePose]:
    spec.validate()
    n = spec.frames
    s = np.arange(n) / (n - 1)
    if spec.kind.startswith("linear"):
        start, end = _vec3(spec.start, "start"), _vec3(spec.end, "end")
        positions = start + s[:, None] * (end - start)
    else:
        points = np.array([_vec3(p, "control point") for p in spec.control_points])
        knots = np.linspace(0.0, 1.0, len(points))
        if len(points) == 2:
            path = lambda u: points[0] + u[:, None] * (points[1] - points[0])  # noqa: E731
        else:
            path = CubicSpline(knots, points, axis=0)
        # du/ds = 1 + a*cos(2*pi*s) > 0, so the warp is monotone.
        u = s + spec.speed_variation * np.sin(2.0 * math.pi * s) / (2.0 * math.pi)
        u[-1] = 1.0
        positions = np.asarray(path(u))
    rotating = spec.kind == "nonlinear-rotating"
    poses = []
    for k in range(n):
        if rotating:
            poses.append(DronePose(k, positions[k].copy(), k * spec.yaw_rate, k * spec.pitch_rate, k * spec.roll_rate))
        else:
            poses.append(DronePose(k, positions[k].copy()))
    return poses


# -- rendering ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RenderedDrone:
    mask: ForegroundMask
    box: BoundingBox | None
    visible: bool


def cuboid_corners(pose: DronePose, spec: DroneSpec) -> np.ndarray:
    """The 8 body corners in camera coordinates (mm)."""
    half = 0.5 * np.array([spec.width_mm, spec.height_mm, spec.depth_mm])
    return (_CORNER_SIGNS * half) @ pose.rotation.T + pose.position


def _clip_near(corners: np.ndarray) -> np.ndarray:
    """Vertices of the cuboid's intersection with the half-space z >= near."""
    keep = corners[:, 2] >= _NEAR_PLANE_MM
    if keep.all():
        return corners
    pts = [c for c in corners[keep]]
    for i, j in _EDGES:
        a, b = corners[i], corners[j]
        if (a[2] >= _NEAR_PLANE_MM) != (b[2] >= _NEAR_PLANE_MM):
            t = (_NEAR_PLANE_MM - a[2]) / (b[2] - a[2])
            pts.append(a + t * (b - a))
    return np.array(pts) if pts else np.zeros((0, 3))


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices counter-clockwise (x right, y up)."""
    pts = sorted(set(map(tuple, np.asarray(points, dtype=float))))
    if len(pts) <= 2:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def rasterize_convex_polygon(hull: np.ndarray, width: int, height: int) -> np.ndarray:
    """Boolean (height, width) image of pixel centres inside or on the polygon."""
    bits = np.zeros((height, width), dtype=bool)
    if len(hull) < 3:
        return bits
    x_lo = max(0, math.ceil(hull[:, 0].min() - 1e-9))
    x_hi = min(width - 1, math.floor(hull[:, 0].max() + 1e-9))
    y_lo = max(0, math.ceil(hull[:, 1].min() - 1e-9))
    y_hi = min(height - 1, math.floor(hull[:, 1].max() + 1e-9))
    if x_lo > x_hi or y_lo > y_hi:
        return bits
    xs = np.arange(x_lo, x_hi + 1, dtype=float)[None, :]
    ys = np.arange(y_lo, y_hi + 1, dtype=float)[:, None]
    inside = np.ones((ys.shape[0], xs.shape[1]), dtype=bool)
    for a, b in zip(hull, np.roll(hull, -1, axis=0)):
        ex, ey = b[0] - a[0], b[1] - a[1]
        tol = 1e-9 * math.hypot(ex, ey)
        inside &= ex * (ys - a[1]) - ey * (xs - a[0]) >= -tol
    bits[y_lo : y_hi + 1, x_lo : x_hi + 1] = inside
    return bits


def render_drone(
    intrinsics: CameraIntrinsics, image_size: tuple[int, int], pose: DronePose, spec: DroneSpec
) -> RenderedDrone:
    """Rasterise the projected cuboid of one drone into a full-image mask."""
    width, height = image_size
    empty = RenderedDrone(ForegroundMask.empty(width, height), None, False)
    pts = _clip_near(cuboid_corners(pose, spec))
    if len(pts) == 0:
        return empty
    hull = convex_hull(project_points(intrinsics, pts))
    mask = ForegroundMask(rasterize_convex_polygon(hull, width, height))
    box = mask_bounding_box(mask)
    if box is None:
        return empty
    return RenderedDrone(mask, box, True)


# -- scenarios ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DroneEntry:
    drone_class: str
    motion: MotionSpec


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    intrinsics: CameraIntrinsics
    image_size: tuple[int, int]
    drones: tuple[DroneEntry, ...]
    fps: int = 30
    rng_seed: int = 0
    detector_noise: DetectorNoiseModel = field(default_factory=DetectorNoiseModel)

    def validate(self, specs: SpecDatabase | None = None):
        specs = specs if specs is not None else default_spec_database()
        w, h = self.image_size
        if w <= 0 or h <= 0:
            raise InvalidSpecError("image_size must be positive")
        if not self.drones:
            raise InvalidSpecError("scenario needs at least one drone")
        for entry in self.drones:
            if entry.drone_class not in specs:
                raise UnknownClassError(entry.drone_class)
            entry.motion.validate()
        for entry in self.drones:
            if any(p.position[2] <= 0 for p in generate_poses(entry.motion)):
                raise InvalidSpecError(f"{entry.drone_class} passes behind the camera")

    @property
    def frames(self) -> int:
        return max(d.motion.frames for d in self.drones)


@dataclass(frozen=True, eq=False)
class RenderedFrame:
    frame: int
    drones: dict[int, RenderedDrone]


class SimulatedScenario:
    """In-memory view of a scenario: poses, ground truth, and on-demand masks.

    Drone ids are 1-based in configuration order. Masks are re-rendered on
    request rather than stored, which keeps long sequences cheap in memory.
    """

    def __init__(self, config: ScenarioConfig, specs: SpecDatabase | None = None):
        self.specs = specs if specs is not None else default_spec_database()
        config.validate(self.specs)
        self.config = config
        self.name = config.name
        self.intrinsics = config.intrinsics
        self.image_size = tuple(config.image_size)
        self.classes = {i + 1: d.drone_class for i, d in enumerate(config.drones)}
        self.poses = {i + 1: generate_poses(d.motion) for i, d in enumerate(config.drones)}
        self._boxes: dict[int, dict[int, BoundingBox]] | None = None

    @property
    def frames(self) -> int:
        return self.config.frames

    def render_drone(self, drone_id: int, frame: int) -> RenderedDrone:
        poses = self.poses[drone_id]
        if frame >= len(poses):
            w, h = self.image_size
            return RenderedDrone(ForegroundMask.empty(w, h), None, False)
        spec = self.specs[self.classes[drone_id]]
        return render_drone(self.intrinsics, self.image_size, poses[frame], spec)

    def render(self, frame: int) -> RenderedFrame:
        return RenderedFrame(frame, {i: self.render_drone(i, frame) for i in self.classes})

    def boxes(self) -> dict[int, dict[int, BoundingBox]]:
        """``drone_id -> frame -> box`` over visible frames (cached)."""
        if self._boxes is None:
            boxes: dict[int, dict[int, BoundingBox]] = {i: {} for i in self.classes}
            for i, poses in self.poses.items():
                for pose in poses:
                    r = self.render_drone(i, pose.frame)
                    if r.visible:
                        boxes[i][pose.frame] = r.box
            self._boxes = boxes
        return self._boxes

    def gt_tracks(self) -> list[Track]:
        tracks = []
        for i, per_frame in self.boxes().items():
            track = Track(i, self.classes[i])
            for frame in sorted(per_frame):
                track.append(frame, per_frame[frame])
            tracks.append(track)
        return tracks

    def gt_trajectories(self) -> list[Trajectory3D]:
        out = []
        for i, poses in self.poses.items():
            width = self.specs[self.classes[i]].width_mm
            traj = Trajectory3D(i, self.classes[i], width_mm=width)
            for pose in poses:
                d = float(np.linalg.norm(pose.position))
                traj.points.append(TrajectoryPoint3D(pose.frame, pose.position, d, 2.0 * math.atan(width / (2.0 * d))))
            out.append(traj)
        return out

    def mask_for(self, frame: int, drone_id: int) -> ForegroundMask | None:
        if drone_id not in self.classes:
            return None
        r = self.render_drone(drone_id, frame)
        return r.mask if r.visible else None

    def frame_mask(self, frame: int) -> ForegroundMask:
        w, h = self.image_size
        out = ForegroundMask.empty(w, h)
        for i in self.classes:
            r = self.render_drone(i, frame)
            if r.visible:
                out = out | r.mask
        return out

    def detections(self, noise: DetectorNoiseModel | None = None) -> dict[int, list[Detection]]:
        noise = noise if noise is not None else self.config.detector_noise
        gt: dict[int, list] = {f: [] for f in range(self.frames)}
        for i, per_frame in self.boxes().items():
            for frame, box in per_frame.items():
                gt[frame].append((box, self.classes[i]))
        return simulate_detector(gt, noise, self.image_size)


# -- builtin scenarios ---------------------------------------------------------

BUILTIN_NAMES = tuple(f"seq{i:02d}" for i in range(1, 10))

DEFAULT_IMAGE_SIZE = (640, 480)
DEFAULT_INTRINSICS = CameraIntrinsics(fx=3000.0, fy=3000.0, cx=319.5, cy=239.5)


def _linear_axis(axis, start, end, frames=180):
    return MotionSpec("linear-axis", frames, start=start, end=end, axis=axis)


def _linear(start, end, frames=180):
    return MotionSpec("linear-3d", frames, start=start, end=end)


def _nonlinear(points, frames, **rates):
    kind = "nonlinear-rotating" if rates else "nonlinear"
    return MotionSpec(kind, frames, control_points=tuple(points), **rates)


def _builtin_drones(name):
    if name == "seq01":
        return [("Air2S", _linear_axis("x", (-400, 0, 12000), (400, 0, 12000)))]
    if name == "seq02":
        return [("Air2S", _linear_axis("y", (0, -600, 12000), (0, 600, 12000)))]
    if name == "seq03":
        return [("Air2S", _linear_axis("z", (0, 0, 9000), (0, 0, 15000)))]
    if name == "seq04":
        return [
            ("Air2S", _linear((-450, -150, 11000), (450, 150, 13000))),
            ("Tello", _linear((350, 200, 8000), (-350, -200, 9000))),
        ]
    if name == "seq05":
        return [
            ("Mavic3", _linear((-500, 200, 16000), (500, -150, 14000))),
            ("Mini3", _linear((400, -250, 10000), (-400, 150, 11000))),
        ]
    if name == "seq06":
        return [("Air2S", _nonlinear([(-350, -300, 10000), (100, 200, 12000), (300, -100, 14000), (-200, 250, 11000)], 300))]
    if name == "seq07":
        return [("Mini3", _nonlinear([(300, 250, 9000), (-200, -200, 11000), (150, -300, 12500), (-300, 100, 10000)], 300))]
    if name == "seq08":
        return [
            (
                "Air2S",
                _nonlinear(
                    [(-350, 0, 10000), (200, -300, 12000), (350, 200, 13000), (-150, 300, 11000), (-300, -200, 12000)],
                    810,
                    yaw_rate=0.002,
                    roll_rate=0.01,
                ),
            )
        ]
    if name == "seq09":
        return [
            ("Tello", _nonlinear([(300, -200, 8000), (-100, 200, 9000), (-300, -100, 10000)], 300, yaw_rate=0.004, roll_rate=0.02)),
            ("Mavic3", _nonlinear([(-400, 200, 15000), (200, -200, 14000), (400, 150, 16000)], 300, yaw_rate=-0.003, roll_rate=-0.015)),
        ]
    raise KeyError(name)


def builtin_scenario(name: str, rng_seed: int = 0) -> ScenarioConfig:
    """Configuration of one of the nine builtin scenarios ``seq01`` .. ``seq09``."""
    if name not in BUILTIN_NAMES:
        raise InvalidSpecError(f"unknown builtin scenario {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")
    drones = tuple(DroneEntry(cls, motion) for cls, motion in _builtin_drones(name))
    return ScenarioConfig(name, DEFAULT_INTRINSICS, DEFAULT_IMAGE_SIZE, drones, fps=30, rng_seed=rng_seed)


# -- configuration files ---------------------------------------------------------


def motion_to_dict(m: MotionSpec) -> dict:
    out = {"kind": m.kind, "frames": m.frames}
    if m.axis is not None:
        out["axis"] = m.axis
    if m.start is not None:
        out["start"] = [float(x) for x in m.start]
    if m.end is not None:
        out["end"] = [float(x) for x in m.end]
    if m.control_points is not None:
        out["control_points"] = [[float(x) for x in p] for p in m.control_points]
    if m.kind == "nonlinear-rotating":
        out.update(yaw_rate=m.yaw_rate, pitch_rate=m.pitch_rate, roll_rate=m.roll_rate)
    if not m.kind.startswith("linear"):
        out["speed_variation"] = m.speed_variation
    return out


def config_to_dict(config: ScenarioConfig) -> dict:
    k = config.intrinsics
    noise = asdict(config.detector_noise)
    noise.pop("rng_seed")
    return {
        "name": config.name,
        "intrinsics": {"fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy, "skew": k.skew},
        "image_size": list(config.image_size),
        "fps": config.fps,
        "rng_seed": config.rng_seed,
        "detector_noise": noise,
        "drones": [{"class": d.drone_class, "motion": motion_to_dict(d.motion)} for d in config.drones],
    }


def _get(data: dict, key: str, where: str, kind, default=...):
    field_name = f"{where}.{key}" if where else key
    if key not in data:
        if default is ...:
            raise ConfigError(field_name, "missing")
        return default
    value = data[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(field_name, f"expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(field_name, f"expected an integer, got {value!r}")
        return value
    if not isinstance(value, kind):
        raise ConfigError(field_name, f"expected {kind.__name__}, got {value!r}")
    return value


def _vector(value, field_name):
    if not (isinstance(value, list) and len(value) == 3 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        raise ConfigError(field_name, "expected a list of 3 numbers")
    return tuple(float(x) for x in value)


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from parsed JSON.

    Raises:
        ConfigError: naming the first offending field, e.g. ``drones[0].motion.kind``.
    """
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    name = _get(data, "name", "", str)
    intr = _get(data, "intrinsics", "", dict)
    try:
        intrinsics = CameraIntrinsics(
            *(_get(intr, k, "intrinsics", float) for k in ("fx", "fy", "cx", "cy")),
            _get(intr, "skew", "intrinsics", float, 0.0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("intrinsics", str(exc)) from None
    size = _get(data, "image_size", "", list)
    if len(size) != 2 or not all(isinstance(x, int) and not isinstance(x, bool) and x > 0 for x in size):
        raise ConfigError("image_size", "expected [width, height] positive integers")
    noise_data = _get(data, "detector_noise", "", dict, {})
    rng_seed = _get(data, "rng_seed", "", int, 0)
    try:
        noise = DetectorNoiseModel(
            **{k: _get(noise_data, k, "detector_noise", float, 0.0) for k in ("miss_rate", "fp_rate_per_frame", "center_jitter_sigma", "size_jitter_sigma")},
            rng_seed=rng_seed,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("detector_noise", str(exc)) from None
    drones = []
    entries = _get(data, "drones", "", list)
    if not entries:
        raise ConfigError("drones", "at least one drone is required")
    for i, entry in enumerate(entries):
        where = f"drones[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(where, "expected an object")
        cls = _get(entry, "class", where, str)
        m = _get(entry, "motion", where, dict)
        mw = f"{where}.motion"
        kind = _get(m, "kind", mw, str)
        if kind not in MOTION_KINDS:
            raise ConfigError(f"{mw}.kind", f"expected one of {', '.join(MOTION_KINDS)}, got {kind!r}")
        points = _get(m, "control_points", mw, list, None)
        motion = MotionSpec(
            kind=kind,
            frames=_get(m, "frames", mw, int),
            start=_vector(m["start"], f"{mw}.start") if "start" in m else None,
            end=_vector(m["end"], f"{mw}.end") if "end" in m else None,
            control_points=tuple(_vector(p, f"{mw}.control_points[{j}]") for j, p in enumerate(points)) if points is not None else None,
            axis=_get(m, "axis", mw, str, None),
            yaw_rate=_get(m, "yaw_rate", mw, float, 0.0),
            pitch_rate=_get(m, "pitch_rate", mw, float, 0.0),
            roll_rate=_get(m, "roll_rate", mw, float, 0.0),
            speed_variation=_get(m, "speed_variation", mw, float, 0.6),
        )
        try:
            motion.validate()
        except InvalidSpecError as exc:
            raise ConfigError(mw, str(exc)) from None
        drones.append(DroneEntry(cls, motion))
    return ScenarioConfig(
        name=name,
        intrinsics=intrinsics,
        image_size=(size[0], size[1]),
        drones=tuple(drones),
        fps=_get(data, "fps", "", int, 30),
        rng_seed=rng_seed,
        detector_noise=noise,
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON ({exc})") from None
    return config_from_dict(data)


def _write_json(path: Path, data):
    try:
        path.write_text(json.dumps(data, indent=2) + "\n")
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc


def generate_scenario(config: ScenarioConfig, out_dir, specs: SpecDatabase | None = None) -> dict:
    """Render a scenario to disk and return its manifest.

    Layout of ``out_dir``::

        camera.json          intrinsics + identity extrinsics
        config.json          scenario configuration snapshot
        masks/frame{F}_id{I}.pgm
        gt_boxes.csv         frame,id,class,cx,cy,w,h
        gt_trajectory.csv    frame,id,class,x_mm,y_mm,z_mm
        detections.csv       simulated detector output
        manifest.json        written last

    Raises:
        IoFailureError: if a file cannot be written.
    """
    scenario = SimulatedScenario(config, specs)
    out = Path(out_dir)
    mask_dir = out / "masks"
    try:
        mask_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailureError(mask_dir, exc.strerror or str(exc)) from exc
    save_camera(out / "camera.json", config.intrinsics)
    _write_json(out / "config.json", config_to_dict(config))

    boxes: dict[int, dict[int, BoundingBox]] = {i: {} for i in scenario.classes}
    n_masks = 0
    for i, poses in scenario.poses.items():
        for pose in poses:
            r = scenario.render_drone(i, pose.frame)
            if not r.visible:
                continue
            boxes[i][pose.frame] = r.box
            write_pgm(mask_dir / mask_filename(pose.frame, i), r.mask)
            n_masks += 1
    scenario._boxes = boxes

    tracks = scenario.gt_tracks()
    write_gt_boxes(out / "gt_boxes.csv", tracks)
    write_gt_trajectory(out / "gt_trajectory.csv", scenario.gt_trajectories())
    write_detections(out / "detections.csv", scenario.detections())
    manifest = {
        "name": config.name,
        "frames": scenario.frames,
        "fps": config.fps,
        "image_size": list(config.image_size),
        "drones": [
            {"id": t.id, "class": t.drone_class, "visible_frames": len(t)} for t in tracks
        ],
        "masks": n_masks,
        "files": ["camera.json", "config.json", "masks", "gt_boxes.csv", "gt_trajectory.csv", "detections.csv"],
    }
    _write_json(out / "manifest.json", manifest)
    return manifest
