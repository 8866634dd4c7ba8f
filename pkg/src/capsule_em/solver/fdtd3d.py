"""Three-dimensional Yee time stepping."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import mu_0

from . import kernels
from .config import SimulationConfig
from .cpml import CPML
from .media import EdgeMedium, build_coefficients, stability_dt
from .monitors import HuygensBox, VolumeMonitor, dft_stride
from .port import LumpedPort, PortRecord, PortState


class DivergenceError(FloatingPointError):
    """Non-finite field values appeared during time stepping."""

    def __init__(self, step: int):
        super().__init__(f"fields diverged (non-finite values) at step {step}")
        self.step = step


@dataclass
class RunResult:
    record: PortRecord | None
    steps: int
    converged: bool
    dt: float
    volume: VolumeMonitor | None = None
    huygens: HuygensBox | None = None
    extra: dict = field(default_factory=dict)


class Simulation:
    """Leapfrog FDTD over an :class:`EdgeMedium` with CPML on all faces.

    One step advances H from (n - 1/2) dt to (n + 1/2) dt and E from n dt to
    (n + 1) dt. Optional parts: a lumped port, a plane-wave injector, a
    volume phasor monitor and a Huygens box.
    """

    nan_check_interval = 200

    def __init__(self, medium: EdgeMedium, config: SimulationConfig | None = None,
                 port: LumpedPort | None = None, source_scale: float = 1.0):
        self.config = config or SimulationConfig()
        self.medium = medium
        self.dtype = self.config.dtype
        self.dt = stability_dt(medium, self.config.courant_factor)
        self.d = medium.cell_size
        nx, ny, nz = medium.shape
        dt_ = self.dtype
        self.e = [np.zeros((nx, ny + 1, nz + 1), dt_), np.zeros((nx + 1, ny, nz + 1), dt_),
                  np.zeros((nx + 1, ny + 1, nz), dt_)]
        self.h = [np.zeros((nx + 1, ny, nz), dt_), np.zeros((nx, ny + 1, nz), dt_),
                  np.zeros((nx, ny, nz + 1), dt_)]
        self.ch = self.dtype(self.dt / (mu_0 * self.d))
        coef = build_coefficients(medium, self.dt, self.dtype)
        self.ca, self.cb = coef.ca, coef.cb
        self.debye = [(a, idx, cj, kj, bj, np.zeros(idx.size, dt_), np.zeros(idx.size, dt_))
                      for a, idx, cj, kj, bj in coef.debye]
        self.cpml = CPML(medium.shape, self.config.cpml_layers, self.config.cpml, self.d,
                         self.dt, self.dtype)
        self.excitation = self.config.excitation
        self.source_scale = float(source_scale)
        self.port = port
        self.port_state = None
        if port is not None:
            eps, sig = [], []
            for (i, j, k) in port.edges:
                eps.append(medium.eps[port.axis][i, j, k])
                sig.append(medium.sigma[port.axis][i, j, k])
                self.ca[port.axis][i, j, k] = 0
                self.cb[port.axis][i, j, k] = 0
            self.port_state = PortState(port, eps, sig, self.d, self.dt)
        self.injector = None
        self.volume: VolumeMonitor | None = None
        self.huygens: HuygensBox | None = None
        self._stride = 1
        self.n = 0

    # -- configuration -------------------------------------------------

    def add_volume_monitor(self, lo, hi, freqs) -> VolumeMonitor:
        self.volume = VolumeMonitor(lo, hi, freqs, self.medium.shape)
        self._update_stride()
        return self.volume

    def add_huygens_box(self, lo, hi, freqs, origin=(0.0, 0.0, 0.0)) -> HuygensBox:
        self.huygens = HuygensBox(lo, hi, freqs, self.d, origin)
        self._update_stride()
        return self.huygens

    def set_injector(self, injector) -> None:
        self.injector = injector

    def _update_stride(self):
        fmax = 0.0
        for m in (self.volume, self.huygens):
            if m is not None:
                fmax = max(fmax, float(np.max(m.freqs)))
        self._stride = dft_stride(fmax, self.dt, self.config.dft_samples_per_period) if fmax else 1

    # -- stepping ----------------------------------------------------------

    def source_voltage(self, t: float) -> float:
        return self.source_scale * float(self.excitation(t))

    def step(self) -> tuple[float, float, float]:
        """Advance one time step; returns (port V, port I, source V) or zeros."""
        n = self.n
        dt = self.dt
        e, h = self.e, self.h
        kernels.update_h(h[0], h[1], h[2], e[0], e[1], e[2], self.ch)
        self.cpml.apply_h(h, e, self.ch)
        if self.injector is not None:
            self.injector.correct_h(self, n)
        sample = (n + 1) % self._stride == 0
        if sample and self.huygens is not None:
            self.huygens.sample_h(h, (n + 0.5) * dt, self._stride * dt)

        if self.port_state is not None:
            self.port_state.save(e)
        olds = [e[a].reshape(-1)[idx] for a, idx, *_ in self.debye]
        kernels.update_e(e[0], e[1], e[2], h[0], h[1], h[2], *self.ca, *self.cb)
        self.cpml.apply_e(e, h, self.cb)
        for (a, idx, cj, kj, bj, j, _), old in zip(self.debye, olds):
            kernels.debye_update(e[a], old, j, idx, cj, kj, bj)
        if self.injector is not None:
            self.injector.correct_e(self, n)
        out = (0.0, 0.0, 0.0)
        if self.port_state is not None:
            vs = self.source_voltage((n + 0.5) * dt) if self.port.active else 0.0
            v, i = self.port_state.update(e, h, vs)
            out = (v, i, vs)
        self.n = n + 1
        if sample:
            t = self.n * dt
            w = self._stride * dt
            if self.volume is not None:
                self.volume.sample_e(e, t, w)
            if self.huygens is not None:
                self.huygens.sample_e(e, t, w)
        if self.n % self.nan_check_interval == 0 and not self.finite():
            raise DivergenceError(self.n)
        return out

    def finite(self) -> bool:
        return all(np.isfinite(a.sum()) for a in self.e + self.h)

    def field_energy(self) -> float:
        """Electric plus magnetic energy with E at n dt and H at (n - 1/2) dt."""
        from scipy.constants import epsilon_0
        d3 = self.d**3
        we = sum(float(np.sum(epsilon_0 * self.medium.eps[a] * self.e[a].astype(float) ** 2))
                 for a in range(3))
        wm = sum(float(np.sum(mu_0 * self.h[a].astype(float) ** 2)) for a in range(3))
        return 0.5 * (we + wm) * d3

    def run(self, max_steps: int | None = None, min_steps: int = 0) -> RunResult:
        """Step until the port energy has decayed or ``max_steps`` is reached.

        Without a port the run lasts ``max_steps`` (default: twice the
        excitation duration plus the config limit cap).
        """
        cfg = self.config
        max_steps = int(max_steps or cfg.max_steps)
        src_end = int(math.ceil(self.excitation.duration / self.dt))
        if self.port_state is None:
            steps = max_steps
            for _ in range(steps):
                self.step()
            return RunResult(None, self.n, True, self.dt, self.volume, self.huygens)

        v = np.zeros(max_steps)
        i = np.zeros(max_steps)
        s = np.zeros(max_steps)
        z0 = self.port.z0
        period = max(1, int(round(1.0 / (self.excitation.center * self.dt))))
        ratio = 10.0 ** (cfg.decay_threshold / 10.0)
        peak = 0.0
        window = 0.0
        converged = False
        n_done = 0
        for n in range(max_steps):
            vn, i_n, sn = self.step()
            v[n], i[n], s[n] = vn, i_n, sn
            if not (math.isfinite(vn) and math.isfinite(i_n)):
                raise DivergenceError(self.n)
            window += vn * vn / z0 + z0 * i_n * i_n
            n_done = n + 1
            if n_done % period == 0:
                peak = max(peak, window)
                if (n_done > src_end and n_done >= min_steps and peak > 0
                        and window <= ratio * peak):
                    converged = True
                    break
                window = 0.0
        if peak == 0.0 and n_done >= src_end:
            converged = True
        band = self.excitation.band
        rec = PortRecord(self.dt, v[:n_done], i[:n_done], s[:n_done], z0=z0, band=band,
                         converged=converged)
        return RunResult(rec, n_done, converged, self.dt, self.volume, self.huygens)
