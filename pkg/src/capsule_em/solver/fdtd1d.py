"""One-dimensional Yee line (Ex, Hy, propagation along z).

Used for plane-wave validation in lossy and dispersive media and as the
incident-field generator of the total-field/scattered-field injector.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.constants import c as C0, mu_0

from .config import CPMLProfile
from .cpml import profile_coefficients
from .media import debye_terms


class Line1D:
    """Ex at nodes k = 0..n, Hy at k + 1/2, CPML of ``npml`` cells at both ends.

    Parameters
    ----------
    n : int
        Number of cells.
    cell_size : float
        Cell length (m).
    dt : float, optional
        Time step; defaults to ``courant * cell_size / c``.
    eps, sigma, delta_eps, tau : array_like, optional
        Per-node eps_inf, static conductivity and Debye pole (length n + 1).
    """

    def __init__(self, n: int, cell_size: float, dt: float | None = None, courant: float = 0.99,
                 eps=None, sigma=None, delta_eps=None, tau=None, npml: int = 10,
                 profile: CPMLProfile | None = None):
        self.n = int(n)
        self.d = float(cell_size)
        self.dt = float(dt) if dt is not None else courant * self.d / C0
        if self.dt * C0 > self.d:
            raise ValueError("1D time step violates the Courant limit")
        nodes = self.n + 1
        self.eps = np.broadcast_to(np.asarray(1.0 if eps is None else eps, dtype=float), (nodes,)).copy()
        self.sigma = np.broadcast_to(np.asarray(0.0 if sigma is None else sigma, dtype=float), (nodes,)).copy()
        de = np.broadcast_to(np.asarray(0.0 if delta_eps is None else delta_eps, dtype=float), (nodes,))
        ta = np.broadcast_to(np.asarray(1.0 if tau is None else tau, dtype=float), (nodes,))
        ca, cb, cj, kj, bj = debye_terms(self.eps, self.sigma, de, ta, self.dt)
        self.ca, self.cb = ca, cb / self.d
        self.cj, self.kj, self.bj = cj, kj, bj
        self.dispersive = bool(np.any(de > 0))
        self.j = np.zeros(nodes)
        self.ch = self.dt / (mu_0 * self.d)
        self.ex = np.zeros(nodes)
        self.hy = np.zeros(self.n)
        self.npml = int(npml)
        prof = profile or CPMLProfile()
        if self.npml:
            m = self.npml
            e_depth = (m - np.arange(1, m)) / m
            h_depth = (m - np.arange(m) - 0.5) / m
            self.be, self.ce = profile_coefficients(e_depth, prof, self.d, self.dt)
            self.bh, self.ch_ = profile_coefficients(h_depth, prof, self.d, self.dt)
            self.psi_e = np.zeros((2, m - 1))
            self.psi_h = np.zeros((2, m))
        self.step_count = 0
        self._e_sources = []
        self._freqs = None

    # -- sources and monitors ----------------------------------------------------

    def add_soft_source(self, node: int, waveform, scale: float = 1.0) -> None:
        """Add ``scale * waveform(t)`` to Ex at ``node`` after each E update."""
        self._e_sources.append((int(node), waveform, float(scale)))

    def monitor(self, freqs) -> None:
        self._freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
        self.e_ph = np.zeros((len(self._freqs), self.n + 1), dtype=np.complex128)
        self.h_ph = np.zeros((len(self._freqs), self.n), dtype=np.complex128)

    # -- stepping --------------------------------------------------------------

    def update_h(self) -> None:
        de = np.diff(self.ex)
        self.hy -= self.ch * de
        if self.npml:
            m = self.npml
            lo, hi = slice(0, m), slice(self.n - m, self.n)
            self.psi_h[0] = self.bh * self.psi_h[0] + self.ch_ * de[lo]
            self.psi_h[1] = self.bh[::-1] * self.psi_h[1] + self.ch_[::-1] * de[hi]
            self.hy[lo] -= self.ch * self.psi_h[0]
            self.hy[hi] -= self.ch * self.psi_h[1]

    def update_e(self) -> None:
        e_old = self.ex.copy() if self.dispersive else None
        dh = np.zeros(self.n + 1)
        dh[1:-1] = np.diff(self.hy)
        self.ex[1:-1] = self.ca[1:-1] * self.ex[1:-1] - self.cb[1:-1] * dh[1:-1]
        if self.npml:
            m = self.npml
            lo = slice(1, m)
            hi = slice(self.n - m + 1, self.n)
            self.psi_e[0] = self.be * self.psi_e[0] + self.ce * dh[lo]
            self.psi_e[1] = self.be[::-1] * self.psi_e[1] + self.ce[::-1] * dh[hi]
            self.ex[lo] -= self.cb[lo] * self.psi_e[0]
            self.ex[hi] -= self.cb[hi] * self.psi_e[1]
        if self.dispersive:
            self.ex -= self.cj * self.j
            self.j = self.kj * self.j + self.bj * (self.ex - e_old)

    def advance_h(self) -> None:
        """H from (n - 1/2) dt to (n + 1/2) dt, with its Fourier sample."""
        self.update_h()
        if self._freqs is not None:
            t = (self.step_count + 0.5) * self.dt
            self.h_ph += np.exp(-2j * math.pi * self._freqs * t)[:, None] * self.hy * self.dt

    def advance_e(self) -> None:
        """E from n dt to (n + 1) dt, soft sources, then the Fourier sample."""
        self.update_e()
        t = (self.step_count + 1) * self.dt
        for node, wf, scale in self._e_sources:
            self.ex[node] += scale * float(wf(t))
        self.step_count += 1
        if self._freqs is not None:
            self.e_ph += np.exp(-2j * math.pi * self._freqs * t)[:, None] * self.ex * self.dt

    def step(self) -> None:
        self.advance_h()
        self.advance_e()

    def run(self, steps: int) -> None:
        for _ in range(int(steps)):
            self.step()
        if not np.all(np.isfinite(self.ex)):
            from .fdtd3d import DivergenceError
            raise DivergenceError(self.step_count)

    # -- post-processing -----------------------------------------------------------

    def node_h(self, q: int = 0) -> np.ndarray:
        """H phasor averaged onto interior E nodes 1..n-1."""
        return 0.5 * (self.h_ph[q, 1:] + self.h_ph[q, :-1])

    def poynting(self, q: int = 0) -> np.ndarray:
        """0.5 Re{E H*} at interior nodes 1..n-1 (W/m^2 in spectral units)."""
        return 0.5 * np.real(self.e_ph[q, 1:-1] * np.conj(self.node_h(q)))

    def dissipated(self, k0: int, k1: int, q: int = 0, sigma=None) -> float:
        """0.5 sum(sigma |E|^2) dz over nodes k0..k1 with half weights at the ends."""
        sig = self.sigma if sigma is None else np.asarray(sigma, dtype=float)
        w = np.ones(k1 - k0 + 1)
        w[0] = w[-1] = 0.5
        e2 = np.abs(self.e_ph[q, k0:k1 + 1]) ** 2
        return 0.5 * float(np.sum(w * sig[k0:k1 + 1] * e2)) * self.d


def fit_attenuation(z, amplitude) -> float:
    """Least-squares decay constant alpha (Np/m) of ``amplitude ~ exp(-alpha z)``."""
    slope = np.polyfit(np.asarray(z, dtype=float), np.log(np.asarray(amplitude, dtype=float)), 1)[0]
    return float(-slope)
