"""Rasterise a :class:`Scene` onto a uniform Yee grid.

Coordinates: the capsule axis is the z axis, the phantom and capsule are
centred on the origin, and the antenna feed sits at azimuth 0 (+x). The
grid origin is shifted so that the lumped-port edges fall exactly on grid
edges.

Cells take the material found at their centre. Edges whose dual cell
straddles a curved interface (phantom surface, shell, substrate) get
anisotropic subcell averages. Conductors are staircased onto edges.
"""
from __future__ import annotations

import hashlib
import itertools
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..materials import TISSUES, Material, broadband_material, tissue_library
from ..solver.media import EdgeMedium, edge_shape
from ..solver.port import LumpedPort, SeriesRLC
from .outline import GeometryError, Outline
from .scene import Scene
from .subcell import RadialLayers, apply_overrides, layered_overrides
from .wrap import wrap_points

AIR, PHANTOM, SHELL, SUBSTRATE, FILLER = range(5)
MM = 1e-3


class GeometryWarning(UserWarning):
    """Discretisation issue that does not prevent a run."""


@dataclass(frozen=True)
class PortEdges:
    """A line of ``n`` edges along ``axis`` starting at node ``start``."""

    axis: int
    start: tuple[int, int, int]
    n: int
    sign: int = 1

    def edges(self) -> list[tuple[int, int, int]]:
        out = []
        for k in range(self.n):
            e = list(self.start)
            e[self.axis] += k
            out.append(tuple(e))
        return out

    def terminals(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        end = list(self.start)
        end[self.axis] += self.n
        return self.start, tuple(end)


@dataclass
class VoxelGrid:
    cell_size: float  # mm
    dims: tuple[int, int, int]
    origin: tuple[float, float, float]  # m, position of node (0, 0, 0)
    material_index: np.ndarray  # uint8 per cell
    materials: list[Material]
    pec: list[np.ndarray]  # bool per edge, one array per component
    port: PortEdges | None
    realized_gap: float = float("nan")  # mm
    bodies: list[RadialLayers] = field(default_factory=list)
    f0: float = 434e6
    warnings: list[str] = field(default_factory=list)

    @property
    def d(self) -> float:
        return self.cell_size * MM

    def to_medium(self, subcell: bool = True) -> EdgeMedium:
        """Frequency-flat edge medium at ``f0`` (conductivity from tan delta there)."""
        table = [m.to_debye(self.f0) for m in self.materials]
        med = EdgeMedium.from_cells(self.material_index, table, self.d)
        if subcell:
            for body in self.bodies:
                apply_overrides(med, layered_overrides(self.dims, self.origin, self.d, body, self.f0))
        for a in range(3):
            med.pec[a] = self.pec[a].copy()
        return med

    def lumped_port(self, z0: float = 50.0, load: SeriesRLC | None = None) -> LumpedPort:
        if self.port is None:
            raise GeometryError("scene has no antenna port")
        return LumpedPort(self.port.axis, self.port.edges(), self.port.sign, z0, load)

    def node_position(self, idx) -> np.ndarray:
        return np.asarray(self.origin) + np.asarray(idx, dtype=float) * self.d

    def pec_edge_count(self) -> int:
        return int(sum(int(p.sum()) for p in self.pec))

    def conductor_length(self) -> float:
        """Total length (mm) of PEC edges."""
        return self.pec_edge_count() * self.cell_size

    def pec_components(self) -> int:
        """Number of connected conductor pieces (graph over PEC edges)."""
        return pec_components(self.pec, self.dims)

    def tissue_volume(self) -> float:
        """Phantom cell count times cell volume (mm^3)."""
        return float(np.count_nonzero(self.material_index == PHANTOM)) * self.cell_size**3

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.material_index).tobytes())
        for p in self.pec:
            h.update(np.packbits(p).tobytes())
        return h.hexdigest()

    # -- binary dump -----------------------------------------------------------

    MAGIC = b"CEMG"

    def dump(self, path) -> None:
        """Write the grid as: 32-byte header, material table, cell indices, packed PEC bits.

        Header (little endian): magic ``CEMG``, uint32 version, uint32 nx,
        ny, nz, float64 cell size (mm), uint32 material count. Each table
        entry is a 16-byte ASCII name, float64 eps_r, float64 sigma (S/m at
        f0). Cells follow as uint8 in C order, then the Ex, Ey, Ez PEC masks
        as numpy ``packbits`` in C order.
        """
        with open(path, "wb") as fh:
            fh.write(struct.pack("<4sI3IdI", self.MAGIC, 1, *self.dims, self.cell_size,
                                 len(self.materials)))
            for m in self.materials:
                fh.write(struct.pack("<16sdd", m.name.encode()[:16], m.eps_r, m.conductivity(self.f0)))
            fh.write(np.ascontiguousarray(self.material_index, dtype=np.uint8).tobytes())
            for p in self.pec:
                fh.write(np.packbits(p).tobytes())

    @staticmethod
    def read_dump(path) -> dict:
        """Parse a dump back into a dict (header fields, table, cells, pec)."""
        raw = open(path, "rb").read()
        magic, version, nx, ny, nz, cell, nmat = struct.unpack_from("<4sI3IdI", raw, 0)
        if magic != VoxelGrid.MAGIC:
            raise ValueError("not a capsule-em grid dump")
        off = 32
        table = []
        for _ in range(nmat):
            name, eps, sig = struct.unpack_from("<16sdd", raw, off)
            table.append((name.rstrip(b"\0").decode(), eps, sig))
            off += 32
        dims = (nx, ny, nz)
        ncell = nx * ny * nz
        cells = np.frombuffer(raw, np.uint8, ncell, off).reshape(dims)
        off += ncell
        pec = []
        for a in range(3):
            shp = edge_shape(dims, a)
            nbytes = (int(np.prod(shp)) + 7) // 8
            bits = np.unpackbits(np.frombuffer(raw, np.uint8, nbytes, off))[:int(np.prod(shp))]
            pec.append(bits.reshape(shp).astype(bool))
            off += nbytes
        return {"version": version, "dims": dims, "cell_size": cell, "materials": table,
                "material_index": cells, "pec": pec}


# -- helpers -------------------------------------------------------------------


def _port_geometry(scene: Scene, outline: Outline, d: float):
    """Feed centre (m), axis, number of cells and the antenna placement shift."""
    cap = scene.capsule
    feed = outline.feed
    _, _, v0, v1 = outline.bbox()
    v_mid = 0.5 * (v0 + v1)
    z_f = (feed.v - v_mid) * MM
    r_in = cap.inner_radius * MM
    if feed.direction == "u":
        axis = 1
    elif feed.direction == "v":
        axis = 2
    else:
        axis = 0
    if axis == 0:
        n = 1
        start = np.array([r_in - d, 0.0, z_f])
    else:
        n = max(1, int(round(feed.gap * MM / d)))
        start = np.array([r_in, 0.0, z_f])
        start[axis] -= 0.5 * n * d
    return start, axis, n, v_mid


def _grid_frame(scene: Scene, d: float, padding: int, npml: int, anchor=None):
    half = scene.phantom_radius * MM + (padding + npml) * d
    lower = np.full(3, -half)
    if anchor is None:
        origin = lower
    else:
        i = np.ceil((anchor - lower) / d - 1e-9)
        origin = anchor - i * d
    dims = np.ceil((half - origin) / d - 1e-9).astype(int)
    return tuple(float(v) for v in origin), tuple(int(v) for v in dims)


def _cell_materials(scene: Scene, origin, dims, d):
    cap = scene.capsule
    rp = scene.phantom_radius * MM
    r_out, r_in = cap.outer_radius * MM, cap.inner_radius * MM
    r_sub = r_in - scene.substrate_thickness * 1e-6
    hz = 0.5 * cap.straight_length * MM
    x = origin[0] + (np.arange(dims[0]) + 0.5) * d
    y = origin[1] + (np.arange(dims[1]) + 0.5) * d
    z = origin[2] + (np.arange(dims[2]) + 0.5) * d
    out = np.zeros(dims, dtype=np.uint8)
    r2xy = x[:, None] ** 2 + y[None, :] ** 2
    for k, zk in enumerate(z):
        plane = np.zeros(dims[:2], dtype=np.uint8)
        plane[r2xy + zk**2 < rp**2] = PHANTOM
        dz = zk - np.clip(zk, -hz, hz)
        rs = np.sqrt(r2xy + dz**2)
        plane[rs < r_out] = SHELL
        plane[rs < r_in] = SUBSTRATE
        plane[rs < r_sub] = FILLER
        out[:, :, k] = plane
    return out


def _snap(points, origin, d, r_max, dims):
    """Nearest grid node to each point, preferring nodes within radius ``r_max`` of the z axis."""
    g = (points - np.asarray(origin)) / d
    base = np.floor(g).astype(np.int64)
    best = np.zeros_like(base)
    best_cost = np.full(len(points), np.inf)
    for corner in np.ndindex(2, 2, 2):
        cand = base + np.array(corner)
        pos = np.asarray(origin) + cand * d
        dist = np.linalg.norm(pos - points, axis=1)
        r = np.hypot(pos[:, 0], pos[:, 1])
        cost = dist + np.where(r <= r_max + 1e-9 * d, 0.0, 10.0 * d)
        better = cost < best_cost
        best[better] = cand[better]
        best_cost[better] = cost[better]
    if np.any(best < 0) or np.any(best > np.asarray(dims)):
        raise GeometryError("conductor lies outside the grid")
    return best


def _connect(pec, a, b, radius=None) -> None:
    """Staircase path of PEC edges from node ``a`` to node ``b``.

    With ``radius`` (node -> distance from the capsule axis) the axis order
    is chosen so the path corners stay as far inward as possible.
    """
    a, b = tuple(int(v) for v in a), tuple(int(v) for v in b)
    axes = [ax for ax in range(3) if a[ax] != b[ax]]
    orders = list(itertools.permutations(axes)) if radius is not None and len(axes) > 1 else [tuple(axes)]
    best, best_r = None, math.inf
    for order in orders:
        cur = list(a)
        worst = -math.inf
        for ax in order[:-1]:
            cur[ax] = b[ax]
            worst = max(worst, radius(cur)) if radius is not None else worst
        if best is None or worst < best_r:
            best, best_r = order, worst
    cur = list(a)
    for axis in best:
        step = 1 if b[axis] > cur[axis] else -1
        while cur[axis] != b[axis]:
            e = list(cur)
            e[axis] = cur[axis] if step > 0 else cur[axis] - 1
            pec[axis][tuple(e)] = True
            cur[axis] += step


def _connect_chain(pec, nodes, radius=None) -> None:
    nodes = [tuple(n) for n in nodes]
    for a, b in zip(nodes, nodes[1:]):
        if a != b:
            _connect(pec, a, b, radius)


def _sample_polyline(pts, spacing, width):
    """Points along a polyline; a band of offsets when the trace is wider than ``spacing``."""
    pts = np.asarray(pts, dtype=float)
    out = []
    for p, q in zip(pts, pts[1:]):
        seg = q - p
        length = float(np.hypot(*seg))
        m = max(1, int(math.ceil(length / spacing)))
        s = np.linspace(0.0, 1.0, m + 1)[:-1]
        out.append(p + s[:, None] * seg)
    out.append(pts[-1:])
    centre = np.concatenate(out)
    if width <= spacing:
        return [centre]
    bands = []
    tang = np.gradient(centre, axis=0)
    tang /= np.maximum(np.linalg.norm(tang, axis=1), 1e-30)[:, None]
    normal = np.column_stack([-tang[:, 1], tang[:, 0]])
    for off in np.linspace(-width / 2, width / 2, int(math.ceil(width / spacing)) + 1):
        bands.append(centre + off * normal)
    return bands


def _inside_polygon(u, v, poly):
    """Even-odd point-in-polygon test (points on the boundary count as inside)."""
    inside = np.zeros(u.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        (u1, v1), (u2, v2) = poly[i], poly[(i + 1) % n]
        cross = ((v1 > v) != (v2 > v)) & (u < (u2 - u1) * (v - v1) / np.where(v2 != v1, v2 - v1, 1) + u1)
        inside ^= cross
    u0, u1_, v0, v1_ = poly[:, 0].min(), poly[:, 0].max(), poly[:, 1].min(), poly[:, 1].max()
    rect = len(poly) == 4 and np.all(np.isin(poly[:, 0], [u0, u1_])) and np.all(np.isin(poly[:, 1], [v0, v1_]))
    if rect:
        inside |= (u >= u0 - 1e-12) & (u <= u1_ + 1e-12) & (v >= v0 - 1e-12) & (v <= v1_ + 1e-12)
    return inside


def _sample_polygon(poly, spacing):
    u0, u1 = poly[:, 0].min(), poly[:, 0].max()
    v0, v1 = poly[:, 1].min(), poly[:, 1].max()
    nu = max(1, int(math.ceil((u1 - u0) / spacing)))
    nv = max(1, int(math.ceil((v1 - v0) / spacing)))
    uu, vv = np.meshgrid(np.linspace(u0, u1, nu + 1), np.linspace(v0, v1, nv + 1), indexing="ij")
    return uu, vv, _inside_polygon(uu, vv, poly)


def _raster_surface(pec, uu, vv, mask, to3d, snap, radius=None) -> None:
    nodes = snap(to3d(uu.ravel(), vv.ravel())).reshape(uu.shape + (3,))
    for axis in (0, 1):
        sl_a = [slice(None), slice(None)]
        sl_b = [slice(None), slice(None)]
        sl_a[axis] = slice(0, -1)
        sl_b[axis] = slice(1, None)
        ok = mask[tuple(sl_a)] & mask[tuple(sl_b)]
        a = nodes[tuple(sl_a)][ok]
        b = nodes[tuple(sl_b)][ok]
        pairs = {(tuple(p), tuple(q)) for p, q in zip(a, b) if tuple(p) != tuple(q)}
        for p, q in sorted(pairs):
            _connect(pec, p, q, radius)


def _pec_nodes(pec, dims) -> np.ndarray:
    """Boolean node array marking every endpoint of a PEC edge."""
    used = np.zeros(tuple(n + 1 for n in dims), dtype=bool)
    for axis in range(3):
        idx = np.argwhere(pec[axis])
        used[tuple(idx.T)] = True
        idx[:, axis] += 1
        used[tuple(idx.T)] = True
    return used


def pec_components(pec, dims) -> int:
    """Connected components of the graph whose links are PEC edges."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    node_shape = tuple(n + 1 for n in dims)
    rows, cols = [], []
    for axis in range(3):
        idx = np.argwhere(pec[axis])
        if idx.size == 0:
            continue
        other = idx.copy()
        other[:, axis] += 1
        rows.append(np.ravel_multi_index(tuple(idx.T), node_shape))
        cols.append(np.ravel_multi_index(tuple(other.T), node_shape))
    if not rows:
        return 0
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    used, inv = np.unique(np.concatenate([r, c]), return_inverse=True)
    n = used.size
    ri, ci = inv[: r.size], inv[r.size:]
    g = coo_matrix((np.ones(r.size), (ri, ci)), shape=(n, n))
    return int(connected_components(g, directed=False)[0])


# -- entry point ------------------------------------------------------------------


def voxelize(scene: Scene, cell_size: float, padding: int = 10, cpml_layers: int = 8,
             f0: float = 434e6, variant: str | None = None) -> VoxelGrid:
    """Rasterise ``scene`` with cubic cells of ``cell_size`` mm.

    ``padding`` air cells separate the phantom from the ``cpml_layers``
    absorbing cells on every side.
    """
    if not cell_size > 0:
        raise GeometryError("cell_size must be > 0")
    if padding < 10:
        raise GeometryError("at least 10 air cells are required between phantom and CPML")
    d = cell_size * MM
    cap = scene.capsule
    outline = scene.outline()
    variant = variant or scene.phantom_variant
    notes: list[str] = []
    port = None
    start = None
    if outline is not None:
        start, axis, n, v_mid = _port_geometry(scene, outline, d)
    origin, dims = _grid_frame(scene, d, padding, cpml_layers, start)
    cells = _cell_materials(scene, origin, dims, d)
    materials = [tissue_library("air"), _phantom(scene.phantom_material, variant, f0),
                 tissue_library(cap.shell_material), tissue_library(scene.substrate_material),
                 tissue_library(cap.filler_material)]
    pec = [np.zeros(edge_shape(dims, a), dtype=bool) for a in range(3)]
    realized = float("nan")
    if outline is not None:
        p_start = tuple(int(v) for v in np.rint((start - np.asarray(origin)) / d))
        port = PortEdges(axis, p_start, n, 1)
        realized = n * cell_size
        if outline.feed.direction != "radial" and abs(realized - outline.feed.gap) > 1e-9:
            notes.append(f"feed gap {outline.feed.gap:g} mm realised as {realized:g} mm ({n} cells)")
        _rasterise_antenna(pec, scene, outline, origin, dims, d, port, v_mid, notes)
    bodies = _bodies(scene, materials, f0)
    for msg in notes:
        warnings.warn(msg, GeometryWarning, stacklevel=2)
    return VoxelGrid(cell_size, dims, origin, cells, materials, pec, port, realized, bodies, f0, notes)


def _phantom(name, variant, f0):
    if variant == "broadband":
        return broadband_material(name, f0)
    return tissue_library(name, variant if name in TISSUES else "nominal")


def _bodies(scene: Scene, materials, f0):
    cap = scene.capsule
    eps = [m.complex_permittivity(f0) for m in materials]
    r_out, r_in = cap.outer_radius * MM, cap.inner_radius * MM
    radii = [r_in, r_out]
    layers = [eps[SUBSTRATE], eps[SHELL], eps[PHANTOM]]
    sub = scene.substrate_thickness * 1e-6
    if sub > 0:
        radii.insert(0, r_in - sub)
        layers.insert(0, eps[FILLER])
    else:
        layers[0] = eps[FILLER]
    capsule = RadialLayers((0.0, 0.0, 0.0), tuple(radii), tuple(layers), 0.5 * cap.straight_length * MM)
    # the phantom/air boundary keeps plain edge averaging: the layered tensor
    # overweights loss there (checked against the lossy-sphere oracle)
    return [capsule]


def _rasterise_antenna(pec, scene, outline, origin, dims, d, port, v_mid, notes):
    cap = scene.capsule
    r_in = cap.inner_radius
    feed = outline.feed
    spacing = d / MM / 3.0
    r_ground = r_in - 1.5 * d / MM

    def radius(node):
        return math.hypot(origin[0] + node[0] * d, origin[1] + node[1] * d)

    def to3d_at(radius):
        def f(u, v):
            return wrap_points(u - feed.u, v - v_mid, radius) * MM
        return f

    def snap_at(radius):
        return lambda pts: _snap(pts, origin, d, radius * MM, dims)

    if outline.trace_width < d / MM and outline.traces and outline.trace_width > 0:
        notes.append(f"trace width {outline.trace_width:g} mm is below the cell size; rasterised as a staircase line")
    t_lo, t_hi = port.terminals()
    term3 = [np.asarray(t) for t in (t_lo, t_hi)]
    term_pos = [np.asarray(origin) + t * d for t in term3]
    feed_pos = to3d_at(r_in)(np.array([feed.u]), np.array([feed.v]))[0]
    to3d, snap = to3d_at(r_in), snap_at(r_in)
    for trace in outline.traces:
        for band in _sample_polyline(trace, spacing, outline.trace_width):
            nodes = snap(to3d(band[:, 0], band[:, 1]))
            _connect_chain(pec, nodes, radius)
            for end_uv, end_node in ((band[0], nodes[0]), (band[-1], nodes[-1])):
                if np.hypot(end_uv[0] - feed.u, end_uv[1] - feed.v) <= 0.5 * feed.gap + 1e-6:
                    p = to3d(np.array([end_uv[0]]), np.array([end_uv[1]]))[0]
                    k = int(np.argmin([np.linalg.norm(p - tp) for tp in term_pos]))
                    _connect(pec, tuple(end_node), tuple(term3[k]), radius)
    for poly in outline.polygons:
        uu, vv, mask = _sample_polygon(poly, spacing)
        _raster_surface(pec, uu, vv, mask, to3d, snap, radius)
    if outline.polygons:
        # radial probe: the upper terminal joins the element above the feed
        n_el = snap(feed_pos[None, :])[0]
        _connect(pec, tuple(n_el), tuple(term3[1]), radius)
    if outline.ground:
        # ground one cell inside the element layer; edges touching element nodes are dropped
        gpec = [np.zeros_like(a) for a in pec]
        tg, sg = to3d_at(r_ground), snap_at(r_ground)
        for poly in outline.ground:
            uu, vv, mask = _sample_polygon(poly, spacing)
            _raster_surface(gpec, uu, vv, mask, tg, sg, radius)
        n_g = sg(tg(np.array([feed.u]), np.array([feed.v])))[0]
        _connect(gpec, tuple(n_g), tuple(term3[0]), radius)
        used = _pec_nodes(pec, dims)
        for axis in range(3):
            idx = np.argwhere(gpec[axis])
            other = idx.copy()
            other[:, axis] += 1
            hit = used[tuple(idx.T)] | used[tuple(other.T)]
            keep = idx[~hit]
            pec[axis][tuple(keep.T)] = True
    for e in port.edges():
        pec[port.axis][e] = False
