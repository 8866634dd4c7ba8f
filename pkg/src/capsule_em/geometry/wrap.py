"""Isometric wrapping of planar outlines onto a cylinder around the z axis."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .outline import GeometryError, Outline


def wrap_points(u, v, radius: float) -> np.ndarray:
    """Map flat (u, v) to (x, y, z) with angle u / radius and z = v (same units)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    phi = u / radius
    return np.stack([radius * np.cos(phi), radius * np.sin(phi), v], axis=-1)


@dataclass
class WrappedOutline:
    radius: float
    traces: list[np.ndarray]  # (n, 3) polylines
    polygons: list[np.ndarray]  # (n, 3) ring vertices
    angular_extent: float  # degrees

    def trace_length(self) -> float:
        return float(sum(np.sum(np.linalg.norm(np.diff(t, axis=0), axis=1)) for t in self.traces))


def _densify(pts, max_step):
    pts = np.asarray(pts, dtype=float)
    out = []
    for p, q in zip(pts, pts[1:]):
        m = max(1, int(math.ceil(np.hypot(*(q - p)) / max_step)))
        out.append(p + np.linspace(0.0, 1.0, m + 1)[:-1, None] * (q - p))
    out.append(pts[-1:])
    return np.concatenate(out)


def wrap_to_cylinder(outline: Outline, radius: float, u_ref: float = 0.0,
                     max_step: float | None = None) -> WrappedOutline:
    """Wrap ``outline`` so that flat ``u`` maps to angle ``(u - u_ref) / radius``.

    Polylines are densified (default step radius / 200) so that chords
    follow the arc; arc length is preserved to well below 0.1%.
    """
    width, _ = outline.size
    circ = 2.0 * math.pi * radius
    if width > circ * (1.0 + 1e-12):
        raise GeometryError(f"outline width {width:g} exceeds the circumference {circ:g}")
    step = max_step or radius / 200.0
    traces = []
    for t in outline.traces:
        p = _densify(t, step)
        traces.append(wrap_points(p[:, 0] - u_ref, p[:, 1], radius))
    polys = [wrap_points(p[:, 0] - u_ref, p[:, 1], radius) for p in (*outline.polygons, *outline.ground)]
    return WrappedOutline(radius, traces, polys, math.degrees(width / radius))
