from __future__ import annotations

import math

import numpy as np
import pytest

from capsule_em.materials import DebyeFit
from capsule_em.radiation import (
    ConfigurationError, angular_grid, integrate_sphere, nf2ff, pattern_cuts, solve_radiation,
)
from capsule_em.solver.config import GaussianPulse, SimulationConfig
from capsule_em.solver.fdtd3d import Simulation
from capsule_em.solver.media import EdgeMedium
from capsule_em.solver.port import LumpedPort

F0 = 434e6


def test_sphere_integrals():
    th, ph = angular_grid(2.0)
    T, _ = np.meshgrid(np.radians(th), np.radians(ph), indexing="ij")
    assert integrate_sphere(th, ph, np.ones_like(T)) == pytest.approx(4 * math.pi, rel=1e-3)
    assert integrate_sphere(th, ph, np.sin(T) ** 2) == pytest.approx(8 * math.pi / 3, rel=1e-3)


def test_isotropic_cuts_are_flat():
    th, ph = angular_grid(2.0)
    cuts = pattern_cuts(th, ph, np.zeros((th.size, ph.size)))
    for angles, g in cuts.values():
        assert np.all(g == 0.0)
        assert angles.min() > -180 and angles.max() == 180


def test_hertzian_cut_nulls_on_axis():
    th, ph = angular_grid(2.0)
    T, _ = np.meshgrid(np.radians(th), np.radians(ph), indexing="ij")
    g = 10 * np.log10(np.maximum(1.5 * np.sin(T) ** 2, 1e-30))
    angles, cut = pattern_cuts(th, ph, g)[90.0]
    assert cut[angles == 0.0][0] < -200
    assert cut[angles == 180.0][0] < -200
    assert cut[angles == 90.0][0] == pytest.approx(10 * math.log10(1.5))
    assert cut[angles == -90.0][0] == pytest.approx(10 * math.log10(1.5))


def test_cut_requires_phi_sample():
    with pytest.raises(ValueError):
        pattern_cuts([0.0, 90.0, 180.0], [0.0, 45.0], np.zeros((3, 2)), cuts=(90.0,))


@pytest.fixture(scope="module")
def lossy_dipole():
    n, d = 36, 5e-3
    c = n // 2
    idx = np.zeros((n, n, n), np.int8)
    idx[c + 2:c + 5, c - 2:c + 2, c - 3:c + 3] = 1
    med = EdgeMedium.from_cells(idx, [DebyeFit(1, 0, 1e-12, 0), DebyeFit(20, 0, 1e-12, 0.05)], d)
    for k in range(c - 5, c + 5):
        if k != c:
            med.pec[2][c, c, k] = True
    cfg = SimulationConfig(excitation=GaussianPulse(F0, 600e6), max_steps=20000)
    sim = Simulation(med, cfg, LumpedPort(2, [(c, c, c)]))
    lo, hi = med.lossy_box()
    sim.add_volume_monitor(lo, hi, [F0])
    sim.add_huygens_box((c - 9,) * 3, (c + 9,) * 3, [F0])
    r = sim.run()
    return med, r, solve_radiation(r.record, r.volume, r.huygens, med.sigma, d)


def test_power_balance(lossy_dipole):
    _, r, sol = lossy_dipole
    assert r.converged
    assert sol.balance_error < 0.02
    assert 0.05 < sol.efficiency < 0.95
    assert sol.p_radiated == pytest.approx(sol.p_poynting, rel=0.02)


def test_gain_minus_directivity_is_efficiency(lossy_dipole):
    _, _, sol = lossy_dipole
    assert sol.max_gain_dbi - sol.directivity_max_dbi == pytest.approx(sol.efficiency_db, abs=1e-9)
    assert sol.realized_gain_dbi <= sol.max_gain_dbi


def test_gain_pattern_integrates_to_efficiency(lossy_dipole):
    _, _, sol = lossy_dipole
    g = 10 ** (sol.gain_dbi / 10)
    assert integrate_sphere(sol.theta_deg, sol.phi_deg, g) / (4 * math.pi) == pytest.approx(sol.efficiency, rel=1e-9)


def test_box_in_lossy_medium_rejected(lossy_dipole):
    med, r, _ = lossy_dipole
    box = r.huygens
    sig = [s.copy() for s in med.sigma]
    sig[0][box.lo[0], box.lo[1] + 2, box.lo[2] + 2] = 0.1
    with pytest.raises(ConfigurationError):
        nf2ff(box, sigma_fields=sig)


def test_pattern_csv(tmp_path, lossy_dipole):
    _, _, sol = lossy_dipole
    sol.write_pattern_csv(tmp_path / "p.csv")
    data = np.loadtxt(tmp_path / "p.csv", delimiter=",", skiprows=1)
    assert data.shape == (sol.theta_deg.size * sol.phi_deg.size, 3)
    sol.write_cut_csv(tmp_path / "c.csv", 0.0)
    assert (tmp_path / "c.csv").read_text().startswith("theta_deg,gain_dbi")
