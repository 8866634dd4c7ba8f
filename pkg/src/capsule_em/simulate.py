"""End-to-end antenna runs: scene -> grid -> FDTD -> S11 and radiation."""
from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig, SolverOptions
from .geometry.scene import Scene
from .geometry.voxelize import VoxelGrid, voxelize
from .radiation import RadiationSolution, solve_radiation
from .solver import kernels
from .solver.fdtd3d import RunResult, Simulation
from .solver.port import extract_s11, series_inductance_s11

log = logging.getLogger(__name__)

WORKERS_ENV = "CAPSULE_EM_WORKERS"


def configure_workers(requested: int | None = None) -> int:
    """Set the kernel thread count: explicit value, else the environment, else all cores."""
    env = os.environ.get(WORKERS_ENV)
    return kernels.set_workers(requested or (int(env) if env else None))


@dataclass
class AntennaRun:
    scene: Scene
    grid: VoxelGrid
    result: RunResult
    freqs: np.ndarray
    s11: np.ndarray
    radiation: RadiationSolution | None
    elapsed: float
    info: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.result.converged

    def s11_at(self, f: float) -> complex:
        """S11 at ``f`` including any series tuning inductor."""
        s = extract_s11(self.result.record, [f])
        p = self.scene.port
        return complex(series_inductance_s11(s, [f], p.series_inductance * 1e-9, p.z0)[0])


def huygens_bounds(lossy_lo, lossy_hi, shape, npml: int, margin: int = 3):
    """Huygens box around the lossy region, at least two cells clear of the CPML."""
    lo = [max(v - margin, npml + 2) for v in lossy_lo]
    hi = [min(v + margin, n - npml - 2) for v, n in zip(lossy_hi, shape)]
    if any(a >= b for a, b in zip(lo, hi)):
        raise ValueError("no room for a Huygens box between phantom and CPML")
    return tuple(lo), tuple(hi)


def run_scene(scene: Scene, solver: SolverOptions | None = None, freqs=None,
              f_rad: float | None = None, radiation: bool = True) -> AntennaRun:
    """Voxelise ``scene``, run to port-energy decay, extract S11 and radiation at ``f_rad``."""
    solver = solver or SolverOptions()
    sim_cfg = solver.sim
    f0 = sim_cfg.excitation.center
    f_rad = f0 if f_rad is None else float(f_rad)
    freqs = solver.frequencies() if freqs is None else np.asarray(freqs, dtype=float)
    configure_workers(solver.workers)
    t_start = time.perf_counter()
    grid = voxelize(scene, solver.cell_size, padding=solver.padding,
                    cpml_layers=sim_cfg.cpml_layers, f0=f_rad)
    medium = grid.to_medium(subcell=solver.subcell)
    port = grid.lumped_port(scene.port.z0)
    sim = Simulation(medium, sim_cfg, port)
    box = None
    if radiation:
        lossy = medium.lossy_box()
        if lossy is None:
            lossy = (port.edges[0], tuple(v + 1 for v in port.edges[0]))
        sim.add_volume_monitor(lossy[0], lossy[1], [f_rad])
        lo, hi = huygens_bounds(lossy[0], lossy[1], medium.shape, sim_cfg.cpml_layers)
        sim.add_huygens_box(lo, hi, [f_rad], origin=grid.origin)
        box = (lo, hi)
    log.info("grid %s, dt %.4g s, running", grid.dims, sim.dt)
    result = sim.run()
    s11_port = extract_s11(result.record, freqs)
    l_series = scene.port.series_inductance * 1e-9
    s11 = series_inductance_s11(s11_port, freqs, l_series, scene.port.z0)
    rad = None
    if radiation:
        rad = solve_radiation(result.record, result.volume, result.huygens, medium.sigma, medium.cell_size)
        if l_series:
            # same source behind a lossless network: only the mismatch changes
            s_rad = series_inductance_s11(extract_s11(result.record, [f_rad]), [f_rad], l_series, scene.port.z0)
            rad.p_available = rad.p_accepted / (1.0 - abs(s_rad[0]) ** 2)
    elapsed = time.perf_counter() - t_start
    info = {"huygens_box": box, "dt": sim.dt, "steps": result.steps,
            "lossy_edges_subcell": solver.subcell, "s11_port": s11_port}
    return AntennaRun(scene, grid, result, freqs, s11, rad, elapsed, info)


def run_config(cfg: RunConfig, **kw) -> AntennaRun:
    return run_scene(cfg.scene, cfg.solver, **kw)
