"""Planar antenna outlines in the unrolled (u, v) frame of the capsule wall.

``u`` runs along the circumference (arc length, mm) and ``v`` along the
capsule axis (mm). Every dimension refers to trace centrelines. Thin
traces are polylines; wide conductors (patch elements, ground) are
polygons that the rasteriser fills.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline


class GeometryError(ValueError):
    """Geometric parameters are inconsistent or do not fit."""


@dataclass(frozen=True)
class DipoleParams:
    """Meandered dipole: arms run along u from the feed, each folded into N runs along v."""

    length: float = 1.9
    width: float = 13.7
    trace_width: float = 0.25
    feed_offset: float = 6.6
    meander_count: int = 6
    feed_gap: float = 0.25

    def __post_init__(self):
        _positive(self, ("length", "width", "trace_width", "feed_offset", "feed_gap"))
        if self.meander_count < 1:
            raise GeometryError("meander_count must be >= 1")
        if self.feed_gap >= self.width:
            raise GeometryError("feed_gap must be smaller than width")


@dataclass(frozen=True)
class LoopParams:
    """Meandered loop: rectangular ring, feed gap on one long side."""

    length: float = 8.4
    width: float = 1.0
    trace_width: float = 0.25
    meander_count: int = 13
    feed_gap: float = 0.25

    def __post_init__(self):
        _positive(self, ("length", "width", "trace_width", "feed_gap"))
        if self.meander_count < 1:
            raise GeometryError("meander_count must be >= 1")
        if self.feed_gap >= self.length:
            raise GeometryError("feed_gap must be smaller than length")


@dataclass(frozen=True)
class PatchParams:
    """Two notched radiating elements joined by a cubic-spline line over a ground plane."""

    l1: float = 8.3
    lc: float = 2.6
    w1: float = 21.4
    w2: float = 0.8
    wc: float = 3.0
    ws: float = 4.0
    ground_size: tuple[float, float] = (24.0, 20.0)  # (u, v)
    spline_x: tuple[float, ...] = (0.0, -1.0, 2.0, -2.0, 2.0, -1.0, 0.0)

    def __post_init__(self):
        _positive(self, ("l1", "lc", "w1", "w2", "wc", "ws"))
        if len(self.ground_size) != 2 or min(self.ground_size) <= 0:
            raise GeometryError("ground_size must be two positive lengths")
        if len(self.spline_x) != 7 or self.spline_x[0] != 0 or self.spline_x[-1] != 0:
            raise GeometryError("spline_x needs exactly 7 entries with first = last = 0")
        gu, gv = self.ground_size
        if self.w1 > gu or 2 * self.l1 >= gv:
            raise GeometryError("radiating elements do not fit on the ground plane")
        if self.lc >= self.l1 or self.wc >= self.w1:
            raise GeometryError("notch larger than the element")


@dataclass(frozen=True)
class WireDipoleParams:
    """Straight axial wire dipole with a centre feed (validation antenna)."""

    length: float = 20.0
    feed_gap: float = 1.0

    def __post_init__(self):
        _positive(self, ("length", "feed_gap"))
        if self.feed_gap >= self.length:
            raise GeometryError("feed_gap must be smaller than length")


def _positive(obj, names):
    for n in names:
        if not getattr(obj, n) > 0:
            raise GeometryError(f"{type(obj).__name__}.{n} must be > 0")


@dataclass(frozen=True)
class Feed:
    """Feed gap centre (u, v), direction 'u', 'v' or 'radial', and gap length."""

    u: float
    v: float
    direction: str
    gap: float


@dataclass
class Outline:
    kind: str
    traces: list[np.ndarray] = field(default_factory=list)  # (n, 2) polylines
    trace_width: float = 0.0
    polygons: list[np.ndarray] = field(default_factory=list)  # (n, 2) closed rings
    ground: list[np.ndarray] = field(default_factory=list)  # polygons on the inner layer
    feed: Feed | None = None

    def bbox(self) -> tuple[float, float, float, float]:
        pts = np.concatenate([*self.traces, *self.polygons, *self.ground])
        return float(pts[:, 0].min()), float(pts[:, 0].max()), float(pts[:, 1].min()), float(pts[:, 1].max())

    @property
    def size(self) -> tuple[float, float]:
        """(u extent, v extent) in mm."""
        u0, u1, v0, v1 = self.bbox()
        return u1 - u0, v1 - v0

    def trace_length(self) -> float:
        return float(sum(polyline_length(t) for t in self.traces))


def polyline_length(pts) -> float:
    pts = np.asarray(pts, dtype=float)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def _dipole(p: DipoleParams) -> Outline:
    W, L, N = p.width, p.length, p.meander_count
    g = p.feed_gap
    a = p.feed_offset - g / 2.0
    b = p.feed_offset + g / 2.0
    if a <= 0 or b >= W:
        raise GeometryError("feed gap must lie inside the dipole width")
    for arm in (a, W - b):
        if p.trace_width * N >= arm:
            raise GeometryError(
                f"meanders overlap: trace_width*N = {p.trace_width * N:g} mm exceeds arm length {arm:g} mm")

    def arm(start, end):
        runs = start + (end - start) * (np.arange(1, N + 1) / N)
        pts = [(start, 0.0)]
        level = 0.0
        for r in runs:
            pts.append((r, level))
            level = L if level == 0.0 else 0.0
            pts.append((r, level))
        return np.array(pts)

    return Outline("dipole", [arm(a, 0.0), arm(b, W)], p.trace_width,
                   feed=Feed(p.feed_offset, 0.0, "u", g))


def _loop(p: LoopParams) -> Outline:
    W, L, g = p.width, p.length, p.feed_gap
    periods = p.meander_count - 1
    amp = max(0.0, (W - 3.0 * p.trace_width) / 2.0)
    # far side (u = W) carries the meanders; the feed side (u = 0) stays straight
    far = [(W, 0.0)]
    if periods > 0 and amp > 0:
        vs = np.linspace(0.0, L, 2 * periods + 1)
        for k in range(2 * periods):
            u = W if k % 2 == 0 else W - amp
            far += [(u, vs[k]), (u, vs[k + 1])]
    far.append((W, L))
    ring = [(0.0, L / 2 + g / 2), (0.0, L), (W, L)] + far[::-1][1:] + [(0.0, 0.0), (0.0, L / 2 - g / 2)]
    pts = _dedupe(np.array(ring, dtype=float))
    return Outline("loop", [pts], p.trace_width, feed=Feed(0.0, L / 2, "v", g))


def _dedupe(pts):
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.any(np.abs(np.diff(pts, axis=0)) > 1e-12, axis=1)
    return pts[keep]


def patch_spline(p: PatchParams):
    """Centreline of the connecting line: u offset (from the element axis) versus v."""
    gu, gv = p.ground_size
    y = np.linspace(p.l1 - p.lc, gv - p.l1 + p.lc, 7)
    x = np.asarray(p.spline_x, dtype=float) * p.ws
    return CubicSpline(y, x), y, x


def _rect(u0, u1, v0, v1):
    return np.array([(u0, v0), (u1, v0), (u1, v1), (u0, v1)], dtype=float)


def _patch(p: PatchParams) -> Outline:
    gu, gv = p.ground_size
    uc = gu / 2.0
    spline, y, _ = patch_spline(p)
    v = np.linspace(y[0], y[-1], 400)
    line = np.column_stack([uc + spline(v), v])
    polys = []
    u0, u1 = uc - p.w1 / 2, uc + p.w1 / 2
    n0, n1 = uc - p.wc / 2, uc + p.wc / 2
    # each element is three rectangles around a notch on its inner edge
    for v0, v1, nv0, nv1 in ((0.0, p.l1, 0.0, p.l1 - p.lc), (gv - p.l1, gv, gv - p.l1 + p.lc, gv)):
        polys.append(_rect(u0, n0, v0, v1))
        polys.append(_rect(n1, u1, v0, v1))
        polys.append(_rect(n0, n1, nv0, nv1))
    ground = [_rect(0.0, gu, 0.0, gv)]
    return Outline("patch", [line], p.w2, polys, ground, feed=Feed(uc, p.l1 / 2.0, "radial", 0.0))


def _wire(p: WireDipoleParams) -> Outline:
    L, g = p.length, p.feed_gap
    return Outline("wire", [np.array([(0.0, 0.0), (0.0, L / 2 - g / 2)]),
                            np.array([(0.0, L / 2 + g / 2), (0.0, L)])], 0.0,
                   feed=Feed(0.0, L / 2, "v", g))


def build_antenna_outline(params) -> Outline:
    """Planar trace set for any supported parameter object."""
    if isinstance(params, DipoleParams):
        return _dipole(params)
    if isinstance(params, LoopParams):
        return _loop(params)
    if isinstance(params, PatchParams):
        return _patch(params)
    if isinstance(params, WireDipoleParams):
        return _wire(params)
    raise GeometryError(f"unsupported antenna parameters: {type(params).__name__}")


# Optimised dimensions per shell thickness (mm).
DIPOLE_TABLE = {
    0.2: DipoleParams(1.9, 13.7, 0.25, 6.6, 6, 0.25),
    0.4: DipoleParams(1.9, 16.2, 0.25, 6.6, 6, 0.25),
    0.6: DipoleParams(1.9, 17.8, 0.25, 6.6, 6, 0.25),
}
LOOP_TABLE = {
    0.2: LoopParams(8.4, 1.0, 0.25, 13, 0.25),
    0.4: LoopParams(10.8, 1.0, 0.2, 13, 1.0),
    0.6: LoopParams(12.3, 1.0, 0.25, 13, 1.0),
}
PATCH_TABLE = {
    0.2: PatchParams(8.3, 2.6, 21.4, 0.8, 3.0, 4.0, (24.0, 20.0), (0, -1, 2, -2, 2, -1, 0)),
    0.4: PatchParams(8.0, 2.5, 31.1, 1.4, 4.4, 5.5, (32.0, 20.0), (0, -1.3, 2.1, -2.5, 2.1, -1.3, 0)),
    0.6: PatchParams(8.1, 2.5, 31.0, 1.4, 4.1, 5.5, (32.0, 20.0), (0, -1.3, 2.1, -2.8, 2.1, -1.3, 0)),
}
TABLES = {"dipole": DIPOLE_TABLE, "loop": LOOP_TABLE, "patch": PATCH_TABLE}


def optimized_params(kind: str, t: float):
    """Dimension set of the optimised thickness nearest to ``t`` (ties go to the thinner)."""
    table = TABLES[kind]
    key = min(table, key=lambda k: (abs(k - t), k))
    return key, table[key]


def wrap_angle(width_mm: float, radius_mm: float) -> float:
    """Angular extent (degrees) of an arc of length ``width_mm`` on ``radius_mm``."""
    return math.degrees(width_mm / radius_mm)
