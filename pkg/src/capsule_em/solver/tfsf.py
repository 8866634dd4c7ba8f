"""Total-field/scattered-field plane-wave injection (+z travel, Ex polarised).

The incident field is produced by a 1D line with the same cell size and
time step, so it carries exactly the numerical dispersion of axial
propagation on the 3D grid.
"""
from __future__ import annotations

from .fdtd1d import Line1D


class PlaneWaveInjector:
    """Corrections on the faces of the node box ``lo``..``hi`` (inclusive).

    Parameters
    ----------
    lo, hi : tuple of int
        Node indices of the total-field box corners.
    waveform : callable
        Incident Ex at the injection point versus time.
    dt, cell_size : float
        Must match the 3D simulation.
    freqs : sequence of float, optional
        Frequencies at which incident phasors are accumulated on the line.
    """

    def __init__(self, lo, hi, waveform, dt: float, cell_size: float, freqs=None,
                 amplitude: float = 1.0, lead: int = 12, npml: int = 10):
        self.lo = tuple(int(v) for v in lo)
        self.hi = tuple(int(v) for v in hi)
        k0, k1 = self.lo[2], self.hi[2]
        # 1D node m maps to 3D z node m + offset; the soft source sits `lead` nodes before k0.
        m_src = npml + 2
        m_k0 = m_src + lead
        self.offset = k0 - m_k0
        n_line = (k1 - self.offset) + lead + npml + 2
        self.line = Line1D(n_line, cell_size, dt=dt, npml=npml)
        # The absolute incident level is whatever the soft source launches; it is
        # measured on the line rather than assumed.
        self.line.add_soft_source(m_src, waveform, amplitude)
        if freqs is not None:
            self.line.monitor(freqs)

    def m(self, k: int) -> int:
        return k - self.offset

    def correct_h(self, sim, n: int) -> None:
        i0, j0, k0 = self.lo
        i1, j1, k1 = self.hi
        ex_inc = self.line.ex
        ch = sim.ch
        hy, hz = sim.h[1], sim.h[2]
        hy[i0:i1, j0:j1 + 1, k0 - 1] += ch * ex_inc[self.m(k0)]
        hy[i0:i1, j0:j1 + 1, k1] -= ch * ex_inc[self.m(k1)]
        einc = ex_inc[self.m(k0):self.m(k1) + 1]
        hz[i0:i1, j0 - 1, k0:k1 + 1] -= ch * einc[None, :]
        hz[i0:i1, j1, k0:k1 + 1] += ch * einc[None, :]
        self.line.advance_h()

    def correct_e(self, sim, n: int) -> None:
        i0, j0, k0 = self.lo
        i1, j1, k1 = self.hi
        hy_inc = self.line.hy
        ex, ez = sim.e[0], sim.e[2]
        cbx, cbz = sim.cb[0], sim.cb[2]
        # Hy_inc at k - 1/2 is line index m(k) - 1
        ex[i0:i1, j0:j1 + 1, k0] += cbx[i0:i1, j0:j1 + 1, k0] * hy_inc[self.m(k0) - 1]
        ex[i0:i1, j0:j1 + 1, k1] -= cbx[i0:i1, j0:j1 + 1, k1] * hy_inc[self.m(k1)]
        hinc = hy_inc[self.m(k0):self.m(k1)]
        ez[i0, j0:j1 + 1, k0:k1] -= cbz[i0, j0:j1 + 1, k0:k1] * hinc[None, :]
        ez[i1, j0:j1 + 1, k0:k1] += cbz[i1, j0:j1 + 1, k0:k1] * hinc[None, :]
        self.line.advance_e()

    def incident_phasor(self, k: int, q: int = 0) -> complex:
        """Incident Ex phasor at 3D z node ``k``."""
        return complex(self.line.e_ph[q, self.m(k)])
