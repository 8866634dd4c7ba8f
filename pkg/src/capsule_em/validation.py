"""Solver checks against the analytic oracles.

Each check builds a small canonical problem, runs it, and returns the
FDTD value next to the oracle value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0, physical_constants

from .materials import DebyeFit
from .oracles.circuit import circuit_s11, resonant_capacitance
from .oracles.mie import mie_lossy_sphere
from .oracles.propagation import plane_wave_attenuation
from .radiation import solve_radiation
from .solver.config import GaussianPulse, SimulationConfig
from .solver.fdtd1d import Line1D, fit_attenuation
from .solver.fdtd3d import Simulation
from .solver.media import EdgeMedium
from .solver.port import LumpedPort, SeriesRLC, extract_s11
from .solver.tfsf import PlaneWaveInjector

ETA0 = physical_constants["characteristic impedance of vacuum"][0]


@dataclass
class Check:
    name: str
    value: float
    reference: float
    info: dict = field(default_factory=dict)

    @property
    def rel_error(self) -> float:
        return self.value / self.reference - 1.0


def attenuation_check(eps_r: float = 67.2, sigma: float = 1.01, f: float = 434e6,
                      cells_per_wavelength: int = 20, n_cells: int = 300) -> Check:
    """1D plane wave in a lossy medium: fitted vs closed-form attenuation constant."""
    pc = plane_wave_attenuation(eps_r, sigma, f)
    d = pc.wavelength / cells_per_wavelength
    line = Line1D(n_cells, d, eps=eps_r, sigma=sigma, npml=10)
    line.add_soft_source(30, GaussianPulse(f, 400e6))
    line.monitor([f])
    line.run(int(80e-9 / line.dt))
    k = np.arange(40, 120)
    alpha = fit_attenuation(k * d, np.abs(line.e_ph[0, k]))
    return Check("attenuation", float(alpha), pc.alpha, {"cell_size": d, "steps": line.step_count})


def sphere_medium(radius: float, cell_size: float, eps_r: float, sigma: float, margin: int = 3,
                  scatter: int = 4, npml: int = 8):
    """Staircased lossy sphere centred in a vacuum grid; returns (medium, centre index, rc)."""
    rc = int(round(radius / cell_size))
    n = 2 * (npml + scatter + margin + rc)
    c = n // 2
    x = (np.arange(n) + 0.5 - c) * cell_size
    r2 = x[:, None, None] ** 2 + x[None, :, None] ** 2 + x[None, None, :] ** 2
    idx = (r2 <= radius**2).astype(np.int8)
    table = [DebyeFit(1.0, 0.0, 1e-12, 0.0), DebyeFit(eps_r, 0.0, 1e-12, sigma)]
    return EdgeMedium.from_cells(idx, table, cell_size), c, rc


def mie_check(radius: float = 0.05, cell_size: float = 1e-3, eps_r: float = 63.0, sigma: float = 1.02,
              f: float = 434e6, precision: str = "single") -> Check:
    """TF/SF plane wave on a lossy sphere: FDTD vs Mie absorption cross-section (m^2)."""
    margin = 3
    med, c, rc = sphere_medium(radius, cell_size, eps_r, sigma, margin)
    pulse = GaussianPulse(f, 600e6)
    sim = Simulation(med, SimulationConfig(excitation=pulse, precision=precision))
    inj = PlaneWaveInjector((c - rc - margin,) * 3, (c + rc + margin,) * 3, pulse, sim.dt,
                            cell_size, freqs=[f])
    sim.set_injector(inj)
    lo, hi = med.lossy_box()
    sim.add_volume_monitor(lo, hi, [f])
    # source, four radial transits at the in-medium speed, then ring-down
    steps = int((pulse.duration + 4.0 * radius * math.ceil(math.sqrt(eps_r)) / C0 + 3e-9) / sim.dt)
    r = sim.run(max_steps=steps)
    p_abs = r.volume.dissipated_power(med.sigma, cell_size)
    e0 = abs(inj.incident_phasor(c))
    c_abs = p_abs / (e0**2 / (2.0 * ETA0))
    mie = mie_lossy_sphere(radius, eps_r, sigma, f)
    return Check("mie", float(c_abs), mie.absorption,
                 {"steps": steps, "shape": med.shape, "mie_terms": mie.n_terms})


def _dipole_run(n: int, cell_size: float, half: int, box: int, f: float):
    med = EdgeMedium.vacuum((n, n, n), cell_size)
    c = n // 2
    for k in range(c - half, c + half):
        if k != c:
            med.pec[2][c, c, k] = True
    cfg = SimulationConfig(excitation=GaussianPulse(f, 600e6), max_steps=20000)
    sim = Simulation(med, cfg, LumpedPort(2, [(c, c, c)]))
    sim.add_huygens_box((c - box,) * 3, (c + box,) * 3, [f])
    r = sim.run()
    return solve_radiation(r.record, None, r.huygens, med.sigma, cell_size)


def hertzian_dipole_check(n: int = 50, cell_size: float = 5e-3, half: int = 7, boxes=(12, 15),
                          f: float = 434e6) -> dict:
    """Short PEC dipole in free space: directivity, efficiency and box-size spread.

    The wire is ``2 * half`` cells long (about a tenth of a wavelength with the
    defaults), so the pattern is that of a Hertzian dipole to within 0.02 dB.
    """
    sols = [_dipole_run(n, cell_size, half, b, f) for b in boxes]
    p = [s.p_radiated for s in sols]
    return {
        "directivity_dbi": sols[0].directivity_max_dbi,
        "efficiency": sols[0].efficiency,
        "surface_spread": abs(p[1] - p[0]) / p[0],
        "power_balance_error": sols[0].balance_error,
        "boxes": tuple(boxes),
    }


def rlc_port_check(R: float = 10.0, L: float = 20e-9, C: float | None = None, z0: float = 50.0,
                   f0: float = 434e6, n: int = 30, cell_size: float = 1e-3, n_freq: int = 41) -> dict:
    """Series RLC lumped load in vacuum vs the closed-form S11 across the excitation band."""
    C = resonant_capacitance(L, f0) if C is None else C
    med = EdgeMedium.vacuum((n, n, n), cell_size)
    pulse = GaussianPulse(f0, 600e6)
    port = LumpedPort(2, [(n // 2,) * 3], z0=z0, load=SeriesRLC(R, L, C))
    r = Simulation(med, SimulationConfig(excitation=pulse, max_steps=20000), port).run()
    f = np.linspace(*pulse.band, n_freq)
    s = extract_s11(r.record, f)
    ref = circuit_s11(R, L, C, z0, f)
    return {
        "f": f, "s11": s, "reference": ref,
        "max_mag_error": float(np.max(np.abs(np.abs(s) / np.abs(ref) - 1.0))),
        "max_phase_error_deg": float(np.max(np.abs(np.degrees(np.angle(s / ref))))),
        "converged": r.converged,
    }
