"""Readers and writers for masks (PGM) and the CSV exchange files.

CSV layouts (header row first):

- detections:     frame,cx,cy,w,h,class,score
- tracks:         frame,id,cx,cy,w,h,class
- gt boxes:       frame,id,class,cx,cy,w,h
- gt trajectory:  frame,id,class,x_mm,y_mm,z_mm
- trajectory:     frame,id,class,x_mm,y_mm,z_mm,distance_mm,theta_rad

Floats are written with ``repr`` so values round-trip exactly and output is
byte-stable.
"""

from __future__ import annotations

import csv
import io
import math
import re
from pathlib import Path

import numpy as np

from .errors import FormatError, IoFailureError
from .reconstruction import SpecDatabase, Trajectory3D, TrajectoryPoint3D, default_spec_database
from .rotation2d import BoundingBox, ForegroundMask
from .tracking import Detection, Track

DETECTION_FIELDS = ("frame", "cx", "cy", "w", "h", "class", "score")
TRACK_FIELDS = ("frame", "id", "cx", "cy", "w", "h", "class")
GT_BOX_FIELDS = ("frame", "id", "class", "cx", "cy", "w", "h")
GT_TRAJECTORY_FIELDS = ("frame", "id", "class", "x_mm", "y_mm", "z_mm")
TRAJECTORY_FIELDS = ("frame", "id", "class", "x_mm", "y_mm", "z_mm", "distance_mm", "theta_rad")

MASK_NAME = "frame{frame}_id{id}.pgm"
_MASK_RE = re.compile(r"^frame(\d+)_id(\d+)\.pgm$")


def _num(x) -> str:
    return repr(float(x))


# -- PGM -----------------------------------------------------------------------


def encode_pgm(mask: ForegroundMask) -> bytes:
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    return header + (mask.bits.astype(np.uint8) * 255).tobytes()


def decode_pgm(data: bytes, name: str = "<pgm>") -> ForegroundMask:
    """Parse a binary 8-bit PGM; any non-zero sample is foreground."""
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError(f"{name}: truncated PGM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise FormatError(f"{name}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError(f"{name}: malformed PGM header") from None
    if maxval > 255 or maxval < 1:
        raise FormatError(f"{name}: only 8-bit PGM is supported")
    pixels = data[pos + 1 : pos + 1 + width * height]
    if len(pixels) != width * height:
        raise FormatError(f"{name}: expected {width * height} pixels, got {len(pixels)}")
    return ForegroundMask(np.frombuffer(pixels, dtype=np.uint8).reshape(height, width) > 0)


def write_pgm(path, mask: ForegroundMask):
    path = Path(path)
    try:
        path.write_bytes(encode_pgm(mask))
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc


def read_pgm(path) -> ForegroundMask:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc
    return decode_pgm(data, str(path))


def mask_filename(frame: int, track_id: int) -> str:
    return MASK_NAME.format(frame=frame, id=track_id)


def parse_mask_filename(name: str) -> tuple[int, int] | None:
    m = _MASK_RE.match(name)
    return (int(m.group(1)), int(m.group(2))) if m else None


# -- CSV plumbing ----------------------------------------------------------------


def _write_csv(path, fields, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    writer.writerows(rows)
    path = Path(path)
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc


def _read_csv(path, fields):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoFailureError(path, exc.strerror or str(exc)) from exc
    reader = csv.DictReader(io.StringIO(text))
    missing = [f for f in fields if f not in (reader.fieldnames or [])]
    if missing:
        raise FormatError(f"{path}: missing column(s) {', '.join(missing)}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        try:
            rows.append({f: row[f] for f in fields})
        except KeyError:
            raise FormatError(f"{path}:{lineno}: short row") from None
    return rows


def _parse(path, lineno, row, field, kind):
    try:
        value = kind(row[field])
    except (TypeError, ValueError):
        raise FormatError(f"{path}:{lineno}: bad {field} value {row[field]!r}") from None
    if kind is float and not math.isfinite(value):
        raise FormatError(f"{path}:{lineno}: non-finite {field}")
    return value


# -- detections / tracks ---------------------------------------------------------


def write_detections(path, detections):
    """``detections`` is a flat iterable or a ``frame -> list`` mapping."""
    if isinstance(detections, dict):
        detections = [d for f in sorted(detections) for d in detections[f]]
    rows = [(d.frame, _num(d.cx), _num(d.cy), _num(d.w), _num(d.h), d.drone_class, _num(d.score)) for d in detections]
    _write_csv(path, DETECTION_FIELDS, rows)


def read_detections(path) -> dict[int, list[Detection]]:
    out: dict[int, list[Detection]] = {}
    for lineno, row in enumerate(_read_csv(path, DETECTION_FIELDS), start=2):
        try:
            det = Detection(
                _parse(path, lineno, row, "frame", int),
                *(_parse(path, lineno, row, f, float) for f in ("cx", "cy", "w", "h")),
                row["class"],
                _parse(path, lineno, row, "score", float),
            )
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        out.setdefault(det.frame, []).append(det)
    return out


def _track_rows(tracks, order):
    rows = []
    for t in tracks:
        for frame, b in t.states:
            values = {"frame": frame, "id": t.id, "class": t.drone_class, "cx": _num(b.cx), "cy": _num(b.cy), "w": _num(b.w), "h": _num(b.h)}
            rows.append(values)
    rows.sort(key=lambda r: (r["frame"], r["id"]))
    return [tuple(r[f] for f in order) for r in rows]


def _read_tracks(path, fields) -> list[Track]:
    by_id: dict[int, list] = {}
    classes: dict[int, str] = {}
    for lineno, row in enumerate(_read_csv(path, fields), start=2):
        tid = _parse(path, lineno, row, "id", int)
        frame = _parse(path, lineno, row, "frame", int)
        try:
            box = BoundingBox(*(_parse(path, lineno, row, f, float) for f in ("cx", "cy", "w", "h")))
        except ValueError as exc:
            if isinstance(exc, FormatError):
                raise
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        if classes.setdefault(tid, row["class"]) != row["class"]:
            raise FormatError(f"{path}:{lineno}: track {tid} changes class")
        by_id.setdefault(tid, []).append((frame, box))
    tracks = []
    for tid in sorted(by_id):
        track = Track(tid, classes[tid])
        for frame, box in sorted(by_id[tid], key=lambda s: s[0]):
            try:
                track.append(frame, box)
            except ValueError as exc:
                raise FormatError(f"{path}: {exc}") from None
        tracks.append(track)
    return tracks


def write_tracks(path, tracks):
    _write_csv(path, TRACK_FIELDS, _track_rows(tracks, TRACK_FIELDS))


def read_tracks(path) -> list[Track]:
    return _read_tracks(path, TRACK_FIELDS)


def write_gt_boxes(path, tracks):
    _write_csv(path, GT_BOX_FIELDS, _track_rows(tracks, GT_BOX_FIELDS))


def read_gt_boxes(path) -> list[Track]:
    return _read_tracks(path, GT_BOX_FIELDS)


# -- trajectories ------------------------------------------------------------------


def _trajectory_rows(trajectories, with_geometry):
    rows = []
    for t in trajectories:
        for p in t.points:
            row = [p.frame, t.track_id, t.drone_class, *(_num(c) for c in p.position)]
            if with_geometry:
                row += [_num(p.distance_mm), _num(p.theta_rad)]
            rows.append(row)
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def write_gt_trajectory(path, trajectories):
    _write_csv(path, GT_TRAJECTORY_FIELDS, _trajectory_rows(trajectories, False))


def write_trajectories(path, trajectories):
    _write_csv(path, TRAJECTORY_FIELDS, _trajectory_rows(trajectories, True))


def _read_trajectory_file(path, fields, specs) -> list[Trajectory3D]:
    rows = _read_csv(path, fields)
    with_geometry = "distance_mm" in fields
    by_id: dict[int, list] = {}
    classes: dict[int, str] = {}
    for lineno, row in enumerate(rows, start=2):
        tid = _parse(path, lineno, row, "id", int)
        frame = _parse(path, lineno, row, "frame", int)
        pos = np.array([_parse(path, lineno, row, f, float) for f in ("x_mm", "y_mm", "z_mm")])
        if classes.setdefault(tid, row["class"]) != row["class"]:
            raise FormatError(f"{path}:{lineno}: track {tid} changes class")
        if with_geometry:
            extra = (_parse(path, lineno, row, "distance_mm", float), _parse(path, lineno, row, "theta_rad", float))
        else:
            extra = None
        by_id.setdefault(tid, []).append((frame, pos, extra))
    out = []
    for tid in sorted(by_id):
        cls = classes[tid]
        width = specs[cls].width_mm if cls in specs else None
        traj = Trajectory3D(tid, cls, width_mm=width)
        last = None
        for frame, pos, extra in sorted(by_id[tid], key=lambda r: r[0]):
            if frame == last:
                raise FormatError(f"{path}: track {tid} has two rows for frame {frame}")
            last = frame
            if extra is None:
                d = float(np.linalg.norm(pos))
                theta = 2.0 * math.atan(width / (2.0 * d)) if width and d > 0 else math.nan
                extra = (d, theta)
            traj.points.append(TrajectoryPoint3D(frame, pos, *extra))
        out.append(traj)
    return out


def read_gt_trajectory(path, specs: SpecDatabase | None = None) -> list[Trajectory3D]:
    return _read_trajectory_file(path, GT_TRAJECTORY_FIELDS, specs if specs is not None else default_spec_database())


def read_trajectories(path, specs: SpecDatabase | None = None) -> list[Trajectory3D]:
    return _read_trajectory_file(path, TRAJECTORY_FIELDS, specs if specs is not None else default_spec_database())
