from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.constants import c as C0, epsilon_0, mu_0

from capsule_em.solver.config import ConfigError, GaussianPulse, SimulationConfig
from capsule_em.solver.fdtd1d import Line1D
from capsule_em.solver.fdtd3d import Simulation
from capsule_em.solver.media import EdgeMedium, stability_dt
from capsule_em.solver.port import (
    LumpedPort, OutOfBandError, PortRecord, SeriesRLC, extract_s11, series_inductance_s11,
)

F0 = 434e6


def _pec_box(n=24, a=8, b=16):
    med = EdgeMedium.vacuum((n, n, n), 1e-3)
    for ax in range(3):
        sl = [slice(a, b + 1)] * 3
        sl[ax] = slice(a, b)
        for other in range(3):
            if other == ax:
                continue
            for v in (a, b):
                s = list(sl)
                s[other] = v
                med.pec[ax][tuple(s)] = True
    return med, a, b


def test_pec_cavity_conserves_discrete_energy():
    med, a, b = _pec_box()
    sim = Simulation(med, SimulationConfig(precision="double"))
    rng = np.random.default_rng(7)
    for ax in range(3):
        s = [slice(a, b + 1)] * 3
        s[ax] = slice(a, b)
        sim.e[ax][tuple(s)] = rng.standard_normal(sim.e[ax][tuple(s)].shape)
        sim.e[ax][med.pec[ax]] = 0
    energy = []
    for _ in range(2000):
        we = epsilon_0 * sum(float(np.sum(x * x)) for x in sim.e)
        h_old = [x.copy() for x in sim.h]
        sim.step()
        wm = mu_0 * sum(float(np.sum(x * y)) for x, y in zip(h_old, sim.h))
        energy.append(we + wm)
    energy = np.array(energy)
    assert np.ptp(energy) / energy[0] < 1e-9


def _lossy_port_run(scale=1.0, precision="double"):
    n = 20
    idx = np.zeros((n, n, n), dtype=np.int8)
    idx[6:14, 6:14, 3:8] = 1
    from capsule_em.materials import DebyeFit

    med = EdgeMedium.from_cells(idx, [DebyeFit(1.0, 0.0, 1e-12, 0.0), DebyeFit(10.0, 20.0, 1e-10, 0.3)], 1e-3)
    cfg = SimulationConfig(precision=precision, max_steps=3000)
    sim = Simulation(med, cfg, LumpedPort(2, [(10, 10, 10)]), source_scale=scale)
    return sim.run()


def test_linearity():
    r1 = _lossy_port_run(1.0)
    r2 = _lossy_port_run(2.5)
    np.testing.assert_allclose(r2.record.v, 2.5 * r1.record.v, rtol=1e-9, atol=1e-12 * np.abs(r1.record.v).max())
    f = np.linspace(300e6, 500e6, 5)
    np.testing.assert_allclose(extract_s11(r2.record, f), extract_s11(r1.record, f), rtol=1e-9)


def test_deterministic_single_precision():
    r1 = _lossy_port_run(precision="single")
    r2 = _lossy_port_run(precision="single")
    assert r1.steps == r2.steps
    assert r1.record.v.tobytes() == r2.record.v.tobytes()
    assert r1.record.i.tobytes() == r2.record.i.tobytes()


def test_matched_load_reflects_nothing():
    med = EdgeMedium.vacuum((20, 20, 20), 1e-3)
    port = LumpedPort(2, [(10, 10, 10)], load=SeriesRLC(50.0))
    r = Simulation(med, SimulationConfig(precision="double", max_steps=20000), port).run()
    assert r.converged
    s = extract_s11(r.record, np.linspace(250e6, 600e6, 8))
    assert np.all(20 * np.log10(np.abs(s)) < -40)


def test_out_of_band_request():
    rec = PortRecord(1e-12, np.zeros(4), np.zeros(4), np.zeros(4), band=(234e6, 634e6))
    with pytest.raises(OutOfBandError):
        rec.waves([1e9])


def test_port_record_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    rec = PortRecord(1.7e-12, rng.standard_normal(50), rng.standard_normal(50), rng.standard_normal(50))
    rec.to_csv(tmp_path / "port.csv")
    back = PortRecord.from_csv(tmp_path / "port.csv")
    assert back.dt == pytest.approx(rec.dt, rel=1e-15)
    for name in ("v", "i", "source"):
        assert np.array_equal(getattr(back, name), getattr(rec, name))


def test_series_inductance_is_lossless():
    s = np.array([0.3 - 0.5j, -0.2 + 0.1j])
    f = np.array([400e6, 450e6])
    t = series_inductance_s11(s, f, 48e-9)
    z = 50 * (1 + s) / (1 - s) + 2j * np.pi * f * 48e-9
    np.testing.assert_allclose(t, (z - 50) / (z + 50), rtol=1e-12)
    assert np.all(np.abs(t) <= 1)
    np.testing.assert_array_equal(series_inductance_s11(s, f, 0.0), s)
    # open-circuit stays open
    assert abs(series_inductance_s11(np.array([1.0 + 0j]), [F0], 10e-9)[0]) == pytest.approx(1.0)


def test_stability_dt_courant():
    med = EdgeMedium.vacuum((4, 4, 4), 1e-3)
    assert stability_dt(med, 0.99) == pytest.approx(0.99 * 1e-3 / (C0 * math.sqrt(3)))


@pytest.mark.parametrize("kwargs", [{"courant_factor": 1.0}, {"decay_threshold": -20.0},
                                    {"cpml_layers": 4}, {"precision": "half"}, {"max_steps": 0}])
def test_simulation_config_errors(kwargs):
    with pytest.raises(ConfigError):
        SimulationConfig(**kwargs)


def test_pulse_band():
    p = GaussianPulse(434e6, 400e6)
    assert p.band == (234e6, 634e6)
    spec = np.abs(np.fft.rfft(p(np.arange(20000) * 1e-11)))
    fr = np.fft.rfftfreq(20000, 1e-11)
    edge = spec[np.argmin(abs(fr - 634e6))] / spec.max()
    assert 20 * np.log10(edge) == pytest.approx(-20.0, abs=0.5)
    with pytest.raises(ConfigError):
        GaussianPulse(434e6, 900e6)


def test_1d_vacuum_phase_velocity():
    d = C0 / F0 / 40
    line = Line1D(400, d, npml=10)
    line.add_soft_source(30, GaussianPulse(F0, 400e6))
    line.monitor([F0])
    line.run(4000)
    k = np.arange(60, 300)
    slope = -np.polyfit(k * d, np.unwrap(np.angle(line.e_ph[0, k])), 1)[0]
    assert 2 * math.pi * F0 / slope / C0 == pytest.approx(1.0, rel=1e-3)


def test_1d_slab_power_balance():
    d = C0 / F0 / 40
    eps = np.ones(401)
    sig = np.zeros(401)
    eps[150:251] = 50.0
    sig[150:251] = 0.5
    line = Line1D(400, d, eps=eps, sigma=sig, npml=10)
    line.add_soft_source(30, GaussianPulse(F0, 400e6))
    line.monitor([F0])
    line.run(20000)
    s = line.poynting()
    net = s[140 - 1] - s[260 - 1]
    assert net == pytest.approx(line.dissipated(140, 260), rel=0.01)


def test_1d_courant_violation():
    with pytest.raises(ValueError):
        Line1D(10, 1e-3, dt=1e-3 / C0 * 1.01)
