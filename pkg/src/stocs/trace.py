"""Deterministic SVG rendering of solved trajectories.

2D scenarios produce one overview file plus a per-step force diagram; 3D
scenarios produce the same set for each of three orthographic projections
(xy, xz, yz).  Output is byte-stable: fixed float precision, stable element
ordering, no timestamps.
"""
from __future__ import annotations

import os

import numpy as np

from .geometry import SdfGrid, transform_points
from .result import StocsResult
from .scenario import Scenario
from .verify import _contact_basis, _rot

_CANVAS = 640
_MARGIN = 40.0
_FORCE_PX = 60.0          # longest force arrow, in pixels


def _fmt(x: float) -> str:
    return f"{x:.3f}"


class _Frame:
    """World-to-pixel mapping for one projection (axes ax, ay)."""

    def __init__(self, lo, hi, ax: int, ay: int):
        self.ax, self.ay = ax, ay
        span = max(hi[0] - lo[0], hi[1] - lo[1], 1e-9)
        self.scale = (_CANVAS - 2 * _MARGIN) / span
        self.lo = lo
        self.width = _CANVAS
        self.height = _CANVAS

    def px(self, w) -> tuple[float, float]:
        x = _MARGIN + (w[self.ax] - self.lo[0]) * self.scale
        y = self.height - _MARGIN - (w[self.ay] - self.lo[1]) * self.scale
        return x, y


def _shade(t: int, T: int) -> str:
    """Dark at the first step, light at the last."""
    lvl = 26 + int(round(178 * (t / max(T, 1))))
    return f"#{lvl:02x}{lvl:02x}{lvl:02x}"


def _terrain_segments(grid: SdfGrid, ax: int, ay: int) -> list:
    """Zero-level segments of the field on the (ax, ay) plane, by marching
    squares over grid nodes (mid slice of any dropped axis)."""
    vals = grid.values
    if grid.dim == 3:
        drop = ({0, 1, 2} - {ax, ay}).pop()
        mid = vals.shape[drop] // 2
        vals = np.take(vals, mid, axis=drop)  # kept axes stay in (ax, ay) order
    ox, oy = grid.origin[ax], grid.origin[ay]
    h = grid.h
    segs = []
    nx, ny = vals.shape[0] - 1, vals.shape[1] - 1
    for i in range(nx):
        for j in range(ny):
            c = [vals[i, j], vals[i + 1, j], vals[i + 1, j + 1],
                 vals[i, j + 1]]
            corners = [(ox + i * h, oy + j * h), (ox + (i + 1) * h, oy + j * h),
                       (ox + (i + 1) * h, oy + (j + 1) * h),
                       (ox + i * h, oy + (j + 1) * h)]
            pts = []
            for k in range(4):
                a, b = c[k], c[(k + 1) % 4]
                if (a < 0) != (b < 0):
                    s = a / (a - b)
                    pa, pb = corners[k], corners[(k + 1) % 4]
                    pts.append((pa[0] + s * (pb[0] - pa[0]),
                                pa[1] + s * (pb[1] - pa[1])))
            if len(pts) >= 2:
                segs.append((pts[0], pts[1]))
    return segs


def _bounds(scen: Scenario, result: StocsResult, ax: int, ay: int):
    pts = [scen.grid.origin[[ax, ay]], scen.grid.upper[[ax, ay]]]
    for t in range(scen.T + 1):
        w = transform_points(result.q[t], scen.cloud.points)
        pts.append(w[:, [ax, ay]].min(axis=0))
        pts.append(w[:, [ax, ay]].max(axis=0))
    pts = np.array(pts)
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.05 * max(hi[0] - lo[0], hi[1] - lo[1], 1e-9)
    return lo - pad, hi + pad


def _svg_header(frame: _Frame) -> list[str]:
    return [f'<svg xmlns="http://www.w3.org/2000/svg" width="{frame.width}" '
            f'height="{frame.height}" '
            f'viewBox="0 0 {frame.width} {frame.height}">',
            f'<rect width="{frame.width}" height="{frame.height}" '
            'fill="white"/>']


def _draw_terrain(out: list[str], frame: _Frame, grid: SdfGrid):
    for (a, b) in _terrain_segments(grid, frame.ax, frame.ay):
        x1, y1 = frame.px(_lift(a, frame))
        x2, y2 = frame.px(_lift(b, frame))
        out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
                   f'y2="{_fmt(y2)}" stroke="#654321" stroke-width="1.5"/>')


def _lift(p2, frame: _Frame):
    """Embed a projected 2D point so frame.px can index it by axis."""
    v = np.zeros(3)
    v[frame.ax], v[frame.ay] = p2[0], p2[1]
    return v


def _draw_cloud(out: list[str], frame: _Frame, world: np.ndarray,
                color: str, r: float = 1.2):
    for w in world:
        x, y = frame.px(w)
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" '
                   f'fill="{color}"/>')


def _watermark(out: list[str], frame: _Frame):
    out.append(f'<text x="{frame.width / 2}" y="{frame.height / 2}" '
               'font-size="48" fill="#cc0000" fill-opacity="0.35" '
               'text-anchor="middle" transform="rotate(-30 '
               f'{frame.width / 2} {frame.height / 2})">UNVERIFIED</text>')


def _world_forces(scen: Scenario, result: StocsResult, t: int):
    """World-frame (anchor point, force vector) pairs at step t."""
    q = result.q[t]
    R = _rot(q, scen.dim)
    d = scen.friction_dirs
    arrows = []
    for c, mc in enumerate(scen.manip_contacts):
        comps = result.u[t, c]
        fw = R @ mc.local_force(comps)
        arrows.append((transform_points(q, mc.point), fw, "#cc2222"))
    for i, p in enumerate(result.index_set.steps[t]):
        z = np.asarray(result.forces[t][i], dtype=float)
        wpt = transform_points(q, p.point)
        n, tangents = _contact_basis(scen.grid, wpt, d)
        fw = z[0] * n + z[1:1 + d] @ tangents
        arrows.append((wpt, fw, "#2266cc"))
    return arrows


def _overview_svg(scen: Scenario, result: StocsResult, frame: _Frame,
                  verified: bool) -> str:
    out = _svg_header(frame)
    _draw_terrain(out, frame, scen.grid)
    T = scen.T
    for t in range(T + 1):
        world = transform_points(result.q[t], scen.cloud.points)
        _draw_cloud(out, frame, world, _shade(t, T))
    for t in range(T + 1):
        for p in result.index_set.steps[t]:
            x, y = frame.px(transform_points(result.q[t], p.point))
            out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="2.5" '
                       'fill="#22aa22"/>')
        for mc in scen.manip_contacts:
            x, y = frame.px(transform_points(result.q[t], mc.point))
            out.append(f'<rect x="{_fmt(x - 3)}" y="{_fmt(y - 3)}" width="6" '
                       'height="6" fill="none" stroke="#cc2222" '
                       'stroke-width="1.5"/>')
    if not verified:
        _watermark(out, frame)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _force_svg(scen: Scenario, result: StocsResult, frame: _Frame, t: int,
               fmax: float, verified: bool) -> str:
    out = _svg_header(frame)
    _draw_terrain(out, frame, scen.grid)
    world = transform_points(result.q[t], scen.cloud.points)
    _draw_cloud(out, frame, world, "#999999")
    scale = _FORCE_PX / fmax if fmax > 0 else 0.0
    for anchor, f, color in _world_forces(scen, result, t):
        mag = float(np.linalg.norm(f[[frame.ax, frame.ay]]))
        x1, y1 = frame.px(anchor)
        if mag * scale > 0.5:
            x2 = x1 + f[frame.ax] * scale
            y2 = y1 - f[frame.ay] * scale
            out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" '
                       f'x2="{_fmt(x2)}" y2="{_fmt(y2)}" stroke="{color}" '
                       'stroke-width="2"/>')
        out.append(f'<circle cx="{_fmt(x1)}" cy="{_fmt(y1)}" r="2" '
                   f'fill="{color}"/>')
    legend = fmax if fmax > 0 else 1.0
    out.append(f'<text x="10" y="20" font-size="14" fill="#333333">step {t}'
               f' &#183; arrow {_FORCE_PX:.0f}px = {legend:.3g} N</text>')
    if not verified:
        _watermark(out, frame)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_trace(scenario: Scenario, result: StocsResult, out_dir: str,
               verified: bool = False) -> list[str]:
    """Write overview and per-step force SVGs; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    if scenario.dim == 2:
        projections = [("", 0, 1)]
    else:
        projections = [("_xy", 0, 1), ("_xz", 0, 2), ("_yz", 1, 2)]
    fmax = 0.0
    for t in range(scenario.T + 1):
        for _, f, _c in _world_forces(scenario, result, t):
            fmax = max(fmax, float(np.linalg.norm(f)))
    paths = []
    for suffix, ax, ay in projections:
        lo, hi = _bounds(scenario, result, ax, ay)
        frame = _Frame(lo, hi, ax, ay)
        p = os.path.join(out_dir, f"overview{suffix}.svg")
        with open(p, "w") as fh:
            fh.write(_overview_svg(scenario, result, frame, verified))
        paths.append(p)
        for t in range(scenario.T + 1):
            p = os.path.join(out_dir, f"forces{suffix}_{t:03d}.svg")
            with open(p, "w") as fh:
                fh.write(_force_svg(scenario, result, frame, t, fmax,
                                    verified))
            paths.append(p)
    return paths
