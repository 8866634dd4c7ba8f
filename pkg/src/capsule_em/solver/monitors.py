"""Running discrete Fourier transforms of volume and surface fields."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels


def dft_stride(f_max: float, dt: float, samples_per_period: int = 40) -> int:
    """Largest step stride that still samples ``f_max`` ``samples_per_period`` times."""
    return max(1, int(1.0 / (f_max * dt * samples_per_period)))


class VolumeMonitor:
    """E phasors of all three components inside an index box.

    The box is given in cell indices ``lo`` (inclusive) to ``hi``
    (exclusive) and is widened by one node on the high side so every edge
    touching those cells is captured.
    """

    def __init__(self, lo, hi, freqs, shape):
        self.freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        self.lo = tuple(int(v) for v in lo)
        self.hi = tuple(int(v) for v in hi)
        self.slices = []
        self.acc = []
        for axis in range(3):
            sl = []
            for a in range(3):
                top = self.hi[a] if a == axis else self.hi[a] + 1
                top = min(top, shape[a] if a == axis else shape[a] + 1)
                sl.append(slice(self.lo[a], top))
            self.slices.append(tuple(sl))
            dims = tuple(s.stop - s.start for s in sl)
            self.acc.append(np.zeros((len(self.freqs),) + dims, dtype=np.complex128))
        self._w = 2.0 * math.pi * self.freqs

    def sample_e(self, e_fields, t: float, weight: float) -> None:
        cw = np.cos(self._w * t)
        sw = np.sin(self._w * t)
        for axis in range(3):
            kernels.dft_accumulate(self.acc[axis], e_fields[axis][self.slices[axis]], cw, sw, weight)

    def dissipated_power(self, sigma_fields, cell_size: float, q: int = 0) -> float:
        """0.5 * sum(sigma |E|^2) * cell volume, summed in fixed component order."""
        total = 0.0
        for axis in range(3):
            sig = sigma_fields[axis][self.slices[axis]]
            total += float(np.sum(sig * np.abs(self.acc[axis][q]) ** 2))
        return 0.5 * total * cell_size**3


@dataclass
class FaceGrid:
    """Colocated tangential E (along ``ea``) and H (along ``other``) on one face.

    Arrays are ordered (ea, other); coordinates are in metres including the
    box origin, weights are trapezoidal lengths along each axis.
    """

    normal: int
    side: int
    plane: float
    ea: int
    other: int
    x_ea: np.ndarray
    x_other: np.ndarray
    w_ea: np.ndarray
    w_other: np.ndarray
    e: np.ndarray  # (nf, na, no)
    h: np.ndarray  # (nf, na, no)


class HuygensBox:
    """Tangential E and H phasors on the six faces of a node-aligned box.

    Tangential E is sampled on its own Yee edges in the face plane; the
    tangential H partner is the average of the two H values straddling the
    plane, which places it on the same point as the orthogonal E edge.
    """

    def __init__(self, lo, hi, freqs, cell_size: float, origin=(0.0, 0.0, 0.0)):
        self.lo = tuple(int(v) for v in lo)
        self.hi = tuple(int(v) for v in hi)
        if any(h - l < 2 for l, h in zip(self.lo, self.hi)):
            raise ValueError("Huygens box must span at least two cells per axis")
        self.freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        self.cell_size = float(cell_size)
        self.origin = np.asarray(origin, dtype=float)
        self._w = 2.0 * math.pi * self.freqs
        nf = len(self.freqs)
        self.faces = []
        for normal in range(3):
            for side, plane in ((-1, self.lo[normal]), (1, self.hi[normal])):
                t1, t2 = [a for a in range(3) if a != normal]
                comps = []
                for ea in (t1, t2):
                    # E along ea lives at half-nodes on ea, nodes on the other tangential axis.
                    other = t2 if ea == t1 else t1
                    sl = [None, None, None]
                    sl[normal] = plane
                    sl[ea] = slice(self.lo[ea], self.hi[ea])
                    sl[other] = slice(self.lo[other], self.hi[other] + 1)
                    # native array order: remaining axes ascending
                    shp = tuple(sl[a].stop - sl[a].start for a in range(3) if a != normal)
                    comps.append(dict(ea=ea, other=other, sl=tuple(sl),
                                      e=np.zeros((nf,) + shp, dtype=np.complex128),
                                      h=np.zeros((nf,) + shp, dtype=np.complex128)))
                self.faces.append(dict(normal=normal, side=side, plane=plane, comps=comps))

    def _phase(self, t):
        return np.exp(-1j * self._w * t)

    def sample_e(self, e_fields, t: float, weight: float) -> None:
        ph = self._phase(t) * weight
        for face in self.faces:
            for c in face["comps"]:
                c["e"] += ph[:, None, None] * e_fields[c["ea"]][c["sl"]][None]

    def sample_h(self, h_fields, t: float, weight: float) -> None:
        ph = self._phase(t) * weight
        for face in self.faces:
            n = face["normal"]
            for c in face["comps"]:
                # H component along `other`, colocated with E along `ea`.
                h = h_fields[c["other"]]
                sl_lo = list(c["sl"])
                sl_hi = list(c["sl"])
                sl_lo[n] = face["plane"] - 1
                sl_hi[n] = face["plane"]
                avg = 0.5 * (h[tuple(sl_lo)] + h[tuple(sl_hi)])
                c["h"] += ph[:, None, None] * avg[None]

    def face_grids(self) -> list[FaceGrid]:
        d = self.cell_size
        out = []
        for face in self.faces:
            n = face["normal"]
            for c in face["comps"]:
                ea, other = c["ea"], c["other"]
                na = self.hi[ea] - self.lo[ea]
                no = self.hi[other] - self.lo[other] + 1
                w_other = np.full(no, d)
                w_other[0] = w_other[-1] = 0.5 * d
                out.append(FaceGrid(
                    normal=n, side=face["side"], plane=face["plane"] * d + self.origin[n],
                    ea=ea, other=other,
                    x_ea=(np.arange(na) + self.lo[ea] + 0.5) * d + self.origin[ea],
                    x_other=(np.arange(no) + self.lo[other]) * d + self.origin[other],
                    w_ea=np.full(na, d), w_other=w_other,
                    e=_as_ea_other(c["e"], ea, other), h=_as_ea_other(c["h"], ea, other)))
        return out

    def poynting_flux(self, q: int = 0) -> float:
        """Outward 0.5 Re{E x H*} flux through the box (cross-check of P_rad)."""
        total = 0.0
        for g in self.face_grids():
            # (E x H) . n = levi(a, b, n) E_a H_b for colocated E_a, H_b
            lc = _levi(g.ea, g.other, g.normal)
            w = np.outer(g.w_ea, g.w_other)
            total += g.side * lc * 0.5 * float(np.real(np.sum(g.e[q] * np.conj(g.h[q]) * w)))
        return total


def _levi(a, b, c):
    return float(np.linalg.det(np.eye(3)[[a, b, c]]))


def _as_ea_other(arr, ea, other):
    return arr if ea < other else np.swapaxes(arr, 1, 2)
