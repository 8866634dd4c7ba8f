"""Per-edge material description and Yee update coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0, epsilon_0

from ..materials import DebyeFit

AXES = "xyz"


def edge_shape(shape, axis: int) -> tuple[int, int, int]:
    """Shape of the E-component array along ``axis`` for a grid of ``shape`` cells."""
    return tuple(n if a == axis else n + 1 for a, n in enumerate(shape))


@dataclass
class DispersiveEdges:
    """Edges of one component that follow a single-pole Debye model."""

    axis: int
    index: np.ndarray  # flat indices into the component array
    delta_eps: np.ndarray
    tau: np.ndarray


@dataclass
class EdgeMedium:
    """Material state of every E edge of a uniform cubic-cell Yee grid.

    ``eps`` holds eps_inf (relative) and ``sigma`` the static conductivity.
    Edges listed in ``dispersive`` additionally carry a Debye pole.
    """

    shape: tuple[int, int, int]
    cell_size: float
    eps: list[np.ndarray]
    sigma: list[np.ndarray]
    pec: list[np.ndarray]
    dispersive: list[DispersiveEdges] = field(default_factory=list)

    @classmethod
    def vacuum(cls, shape, cell_size: float) -> "EdgeMedium":
        shape = tuple(int(n) for n in shape)
        shapes = [edge_shape(shape, a) for a in range(3)]
        return cls(shape, float(cell_size),
                   [np.ones(s) for s in shapes],
                   [np.zeros(s) for s in shapes],
                   [np.zeros(s, dtype=bool) for s in shapes])

    @classmethod
    def from_cells(cls, material_index: np.ndarray, table: list[DebyeFit],
                   cell_size: float) -> "EdgeMedium":
        """Average the four cells around every edge.

        Edges whose neighbours all share one dispersive material keep the
        Debye pole; mixed edges get the arithmetic mean of eps_inf and
        sigma_s of their neighbours.
        """
        idx = np.asarray(material_index)
        shape = idx.shape
        eps_tab = np.array([m.eps_inf for m in table])
        sig_tab = np.array([m.sigma_s for m in table])
        out = cls.vacuum(shape, cell_size)
        padded = np.pad(idx, 1, mode="edge")
        for axis in range(3):
            quads = _edge_neighbours(padded, shape, axis)
            out.eps[axis] = sum(eps_tab[q] for q in quads) / 4.0
            out.sigma[axis] = sum(sig_tab[q] for q in quads) / 4.0
            uniform = np.all([q == quads[0] for q in quads[1:]], axis=0)
            for m, fit in enumerate(table):
                if not fit.is_dispersive:
                    continue
                flat = np.flatnonzero(uniform & (quads[0] == m))
                if flat.size:
                    out.dispersive.append(DispersiveEdges(
                        axis, flat, np.full(flat.size, fit.delta_eps), np.full(flat.size, fit.tau)))
        return out

    def override(self, axis: int, flat_index, eps, sigma) -> None:
        """Replace edges with frequency-flat values and drop any Debye pole on them."""
        flat_index = np.asarray(flat_index, dtype=np.int64)
        self.eps[axis].reshape(-1)[flat_index] = eps
        self.sigma[axis].reshape(-1)[flat_index] = sigma
        for d in self.dispersive:
            if d.axis == axis:
                keep = ~np.isin(d.index, flat_index)
                d.index, d.delta_eps, d.tau = d.index[keep], d.delta_eps[keep], d.tau[keep]

    def min_eps(self) -> float:
        return float(min(e.min() for e in self.eps))

    def sigma_at(self, axis: int, f: float) -> np.ndarray:
        """Effective conductivity of every edge of one component at ``f``."""
        sig = self.sigma[axis].copy()
        w = 2.0 * math.pi * f
        for d in self.dispersive:
            if d.axis != axis:
                continue
            x2 = (w * d.tau) ** 2
            sig.reshape(-1)[d.index] += w**2 * d.tau * d.delta_eps * epsilon_0 / (1.0 + x2)
        return sig

    def lossy_box(self, f: float | None = None):
        """Index bounds (lo, hi) enclosing every lossy edge, or None."""
        lo = np.array(self.shape) + 1
        hi = np.zeros(3, dtype=int)
        found = False
        for axis in range(3):
            sig = self.sigma[axis] if f is None else self.sigma_at(axis, f)
            nz = np.nonzero(sig > 0)
            if nz[0].size:
                found = True
                lo = np.minimum(lo, [a.min() for a in nz])
                hi = np.maximum(hi, [a.max() + 1 for a in nz])
        return (tuple(int(v) for v in lo), tuple(int(v) for v in hi)) if found else None


def _edge_neighbours(padded, shape, axis):
    """The four cell indices sharing each edge of component ``axis``.

    ``padded`` is the cell array padded by one on every side (edge mode),
    so the cells adjacent to edge index j along a transverse axis are
    padded positions j and j+1.
    """
    nx, ny, nz = shape
    t = [a for a in range(3) if a != axis]
    out = []
    for da in (0, 1):
        for db in (0, 1):
            sl = [None, None, None]
            sl[axis] = slice(1, 1 + shape[axis])
            sl[t[0]] = slice(da, da + shape[t[0]] + 1)
            sl[t[1]] = slice(db, db + shape[t[1]] + 1)
            out.append(padded[tuple(sl)])
    return out


def stability_dt(medium: EdgeMedium, courant_factor: float = 0.99) -> float:
    """Courant-limited time step for the fastest wave in the grid."""
    v = C0 / math.sqrt(max(1.0, medium.min_eps()))
    d = medium.cell_size
    return courant_factor / (v * math.sqrt(3.0 / d**2))


def debye_terms(eps_inf, sigma, delta_eps, tau, dt):
    """Trapezoidal ADE terms shared by the 1D and 3D solvers.

    Returns (ca, cb_unit, cj, kj, bj) where the E update reads
    E1 = ca E0 + cb_unit curlH - cj J0 and J1 = kj J0 + bj (E1 - E0).
    ``cb_unit`` multiplies the curl (per metre); divide by the cell size to
    act on raw differences.
    """
    eps_inf = np.asarray(eps_inf, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    delta_eps = np.asarray(delta_eps, dtype=float)
    tau = np.asarray(tau, dtype=float)
    kj = (2.0 * tau - dt) / (2.0 * tau + dt)
    bj = 2.0 * epsilon_0 * delta_eps / (2.0 * tau + dt)
    e = epsilon_0 * eps_inf / dt
    den = e + 0.5 * sigma + 0.5 * bj
    ca = (e - 0.5 * sigma + 0.5 * bj) / den
    cb = 1.0 / den
    cj = 0.5 * (1.0 + kj) / den
    return ca, cb, cj, kj, bj


def _zero_wall(arr, axis):
    sl = [slice(None)] * 3
    for end in (0, -1):
        sl[axis] = end
        arr[tuple(sl)] = 0


@dataclass
class Coefficients:
    ca: list[np.ndarray]
    cb: list[np.ndarray]
    debye: list[tuple]  # (axis, index, cj, kj, bj)


def build_coefficients(medium: EdgeMedium, dt: float, dtype=np.float64) -> Coefficients:
    d = medium.cell_size
    ca, cb = [], []
    for axis in range(3):
        a, b, *_ = debye_terms(medium.eps[axis], medium.sigma[axis], 0.0, 1.0, dt)
        a = a.astype(dtype)
        b = (b / d).astype(dtype)
        a[medium.pec[axis]] = 0
        b[medium.pec[axis]] = 0
        for t in range(3):
            if t != axis:
                _zero_wall(a, t)
                _zero_wall(b, t)
        ca.append(a)
        cb.append(b)
    debye = []
    for disp in medium.dispersive:
        if disp.index.size == 0:
            continue
        flat_pec = medium.pec[disp.axis].reshape(-1)[disp.index]
        idx = disp.index[~flat_pec]
        eps = medium.eps[disp.axis].reshape(-1)[idx]
        sig = medium.sigma[disp.axis].reshape(-1)[idx]
        a, b, cj, kj, bj = debye_terms(eps, sig, disp.delta_eps[~flat_pec], disp.tau[~flat_pec], dt)
        ca[disp.axis].reshape(-1)[idx] = a
        cb[disp.axis].reshape(-1)[idx] = b / d
        debye.append((disp.axis, idx.astype(np.int64), cj.astype(dtype), kj.astype(dtype), bj.astype(dtype)))
    return Coefficients(ca, cb, debye)
