"""Standalone SVG figures: orthographic trajectory views and error curves.

Each input series (a ground-truth file, a prediction file) gets one colour
and one legend entry. Every trajectory in a series becomes one polyline per
projection panel, with a filled circle at its first frame and a cross at its
last.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .metrics import match_trajectories
from .reconstruction import Trajectory3D

SVG_NS = "http://www.w3.org/2000/svg"
PROJECTIONS = (("XY", 0, 1), ("XZ", 0, 2), ("YZ", 1, 2))
PALETTE = ("#000000", "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

PANEL = 260.0
MARGIN = 40.0
LEGEND_ROW = 18.0


@dataclass
class Series:
    label: str
    trajectories: list[Trajectory3D]
    dashed: bool = False


def _bounds(series: list[Series], i: int, j: int):
    pts = [t.positions[:, (i, j)] for s in series for t in s.trajectories if len(t)]
    if not pts:
        return (0.0, 1.0), (0.0, 1.0)
    allp = np.vstack(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = max(float((hi - lo).max()), 1.0)
    # equal scale on both axes so shapes are not distorted
    mid = (lo + hi) / 2.0
    half = 0.55 * span
    return (mid[0] - half, mid[0] + half), (mid[1] - half, mid[1] + half)


def _mapper(x0: float, y0: float, xr, yr, flip_y: bool):
    sx = PANEL / (xr[1] - xr[0])
    sy = PANEL / (yr[1] - yr[0])

    def f(a, b):
        px = x0 + (a - xr[0]) * sx
        py = y0 + ((yr[1] - b) * sy if flip_y else (b - yr[0]) * sy)
        return round(float(px), 2), round(float(py), 2)

    return f


def _fmt(points) -> str:
    return " ".join(f"{x:g},{y:g}" for x, y in points)


def _text(parent, x, y, s, **attrs):
    el = ET.SubElement(parent, "text", {"x": f"{x:g}", "y": f"{y:g}", "font-family": "sans-serif", "font-size": "11", **attrs})
    el.text = s
    return el


def _markers(group, start, end, colour):
    ET.SubElement(group, "circle", {"cx": f"{start[0]:g}", "cy": f"{start[1]:g}", "r": "3.5", "fill": colour, "class": "start"})
    x, y = end
    d = 4.0
    ET.SubElement(
        group,
        "path",
        {"d": f"M{x - d:g},{y - d:g} L{x + d:g},{y + d:g} M{x - d:g},{y + d:g} L{x + d:g},{y - d:g}", "stroke": colour, "stroke-width": "1.8", "class": "end"},
    )


def trajectory_svg(series: list[Series], title: str = "", errors: bool = False) -> str:
    """Render the three projections (and optionally an error panel) as SVG text.

    With ``errors=True`` and at least two series, the first series is taken as
    ground truth and a fourth panel shows per-frame position error of every
    other series against it.
    """
    panels = list(PROJECTIONS)
    show_errors = errors and len(series) >= 2
    n_panels = len(panels) + (1 if show_errors else 0)
    width = MARGIN + n_panels * (PANEL + MARGIN)
    legend_h = LEGEND_ROW * len(series)
    height = MARGIN * 2 + PANEL + 20 + legend_h

    ET.register_namespace("", SVG_NS)
    root = ET.Element("svg", {"xmlns": SVG_NS, "width": f"{width:g}", "height": f"{height:g}", "viewBox": f"0 0 {width:g} {height:g}"})
    if title:
        ET.SubElement(root, "title").text = title
    ET.SubElement(root, "rect", {"width": "100%", "height": "100%", "fill": "white"})
    if title:
        _text(root, width / 2, 16, title, **{"text-anchor": "middle", "class": "heading"})

    for k, (name, i, j) in enumerate(panels):
        x0 = MARGIN + k * (PANEL + MARGIN)
        y0 = MARGIN
        panel = ET.SubElement(root, "g", {"class": "panel", "id": f"panel-{name}"})
        ET.SubElement(panel, "rect", {"x": f"{x0:g}", "y": f"{y0:g}", "width": f"{PANEL:g}", "height": f"{PANEL:g}", "fill": "none", "stroke": "#999"})
        _text(panel, x0 + PANEL / 2, y0 - 8, f"{name[0]}-{name[1]} (mm)", **{"text-anchor": "middle"})
        xr, yr = _bounds(series, i, j)
        # XY keeps image orientation (y down); the depth panels put z upward
        to_px = _mapper(x0, y0, xr, yr, flip_y=(name != "XY"))
        for s_idx, s in enumerate(series):
            colour = PALETTE[s_idx % len(PALETTE)]
            for traj in s.trajectories:
                if not len(traj):
                    continue
                pos = traj.positions
                pts = [to_px(a, b) for a, b in zip(pos[:, i], pos[:, j])]
                attrs = {"points": _fmt(pts), "fill": "none", "stroke": colour, "stroke-width": "1.4", "class": "trajectory", "data-series": s.label, "data-track": str(traj.track_id)}
                if s.dashed:
                    attrs["stroke-dasharray"] = "5,3"
                ET.SubElement(panel, "polyline", attrs)
                _markers(panel, pts[0], pts[-1], colour)

    if show_errors:
        _error_panel(root, series, MARGIN + len(panels) * (PANEL + MARGIN), MARGIN)

    legend = ET.SubElement(root, "g", {"class": "legend"})
    ly = MARGIN + PANEL + 30
    for s_idx, s in enumerate(series):
        colour = PALETTE[s_idx % len(PALETTE)]
        y = ly + s_idx * LEGEND_ROW
        attrs = {"x1": f"{MARGIN:g}", "y1": f"{y:g}", "x2": f"{MARGIN + 24:g}", "y2": f"{y:g}", "stroke": colour, "stroke-width": "2"}
        if s.dashed:
            attrs["stroke-dasharray"] = "5,3"
        ET.SubElement(legend, "line", attrs)
        _text(legend, MARGIN + 30, y + 4, s.label)
    _text(legend, MARGIN + 200, ly + 4, "● start   ✕ end")

    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def _error_panel(root, series: list[Series], x0: float, y0: float):
    gt = series[0].trajectories
    curves = []
    for s_idx, s in enumerate(series[1:], start=1):
        for g, p in match_trajectories(gt, s.trajectories):
            gpos = {pt.frame: pt.position for pt in g.points}
            rows = [(pt.frame, float(np.linalg.norm(pt.position - gpos[pt.frame]))) for pt in p.points if pt.frame in gpos]
            if rows:
                curves.append((s_idx, np.array(rows)))
    panel = ET.SubElement(root, "g", {"class": "panel", "id": "panel-error"})
    ET.SubElement(panel, "rect", {"x": f"{x0:g}", "y": f"{y0:g}", "width": f"{PANEL:g}", "height": f"{PANEL:g}", "fill": "none", "stroke": "#999"})
    _text(panel, x0 + PANEL / 2, y0 - 8, "error (mm) vs frame", **{"text-anchor": "middle"})
    if not curves:
        return
    allr = np.vstack([c for _, c in curves])
    fr = (float(allr[:, 0].min()), max(float(allr[:, 0].max()), float(allr[:, 0].min()) + 1))
    er = (0.0, max(float(allr[:, 1].max()) * 1.05, 1e-9))
    to_px = _mapper(x0, y0, fr, er, flip_y=True)
    for s_idx, rows in curves:
        pts = [to_px(f, e) for f, e in rows]
        ET.SubElement(panel, "polyline", {"points": _fmt(pts), "fill": "none", "stroke": PALETTE[s_idx % len(PALETTE)], "stroke-width": "1.2", "class": "error-curve"})
    _text(panel, x0 + 4, y0 + 12, f"max {er[1] / 1.05:.1f}")
