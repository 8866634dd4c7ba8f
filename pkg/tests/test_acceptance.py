"""Acceptance criteria 1-10, each printing one PASS/FAIL line.

The phantom runs (wire dipole in ST/SI/LI and GI_avg, the shipped table
antennas) take several minutes each at 1 mm cells; they are computed once
per session and shared between criteria.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from conftest import report, synthetic_sweeps

from capsule_em.analysis.classify import ClassifierModel, classify_tissue
from capsule_em.analysis.io import load_table
from capsule_em.analysis.metrics import compute_metrics, derive_metrics, phase_difference
from capsule_em.analysis.sweeps import frequency_bounds
from capsule_em.config import load_config, parse_config
from capsule_em.geometry.voxelize import voxelize
from capsule_em.oracles.bounds import BoundGeometry, efficiency_bound
from capsule_em.simulate import run_config
from capsule_em.solver.fdtd3d import Simulation
from capsule_em.validation import attenuation_check, hertzian_dipole_check, mie_check, rlc_port_check

pytestmark = pytest.mark.slow

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SHIPPED = sorted(CONFIGS.glob("*.ini"))
F0 = 434e6

# Printed derived cells that disagree with the printed primitives (rounding upstream).
UPSTREAM = {("loop", 0.4, "simulated", "diff_ST_SI_deg"): 126.2,
            ("loop", 0.6, "simulated", "diff_ST_SI_deg"): 77.5}


@functools.lru_cache(maxsize=None)
def wire_run(tissue: str, t: float):
    cfg = load_config(CONFIGS / "wire_dipole.ini").with_thickness(t)
    cfg = replace(cfg, scene=replace(cfg.scene, phantom_material=tissue))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_config(cfg)


@functools.lru_cache(maxsize=None)
def shipped_run(name: str):
    if name == "wire_dipole":
        return wire_run("GI_avg", 0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_config(load_config(CONFIGS / f"{name}.ini"))


def phantom_runs():
    runs = {f"wire {t} t={th}": wire_run(t, th) for t in ("ST", "SI", "LI") for th in (0.2,)}
    runs["wire GI_avg t=0.05"] = wire_run("GI_avg", 0.05)
    for p in SHIPPED:
        runs[p.stem] = shipped_run(p.stem)
    return runs


# 1 ---------------------------------------------------------------------------------


def test_acceptance_metric_arithmetic():
    checked, bad, upstream = 0, [], []
    for r in load_table("sensing_results.csv"):
        phases = {t: r[f"phase_{t}_deg"] for t in ("ST", "SI", "LI")}
        direct = derive_metrics(phases, r["fi1_MHz"], r["fi2_MHz"], fc1=r["fc1_MHz"], fc2=r["fc2_MHz"])
        swept = compute_metrics(synthetic_sweeps(phases, r["fi1_MHz"], r["fi2_MHz"], r["fc1_MHz"], r["fc2_MHz"]))
        for m in (direct, swept):
            got = {"diff_ST_SI_deg": m.phase_diff["ST-SI"], "diff_SI_LI_deg": m.phase_diff["SI-LI"],
                   "delta_fi_MHz": m.delta_fi, "fc_diff_MHz": m.fc_diff}
            for col, v in got.items():
                key = (r["antenna"], r["t_mm"], r["source"], col)
                want = UPSTREAM.get(key, r[col])
                checked += 1
                if round(v, 1) != round(want, 1):
                    bad.append(f"{key}: {v:.2f} vs {want}")
                elif key in UPSTREAM and m is direct:
                    upstream.append(f"{r['antenna']} t={r['t_mm']} {col} printed {r[col]} computed {v:.1f}")
    ok = not bad
    report(1, "metric arithmetic", ok,
           f"{checked - len(bad)}/{checked} derived cells exact to 0.1 (direct and via synthetic sweeps); "
           f"upstream inconsistencies: {'; '.join(upstream)}")
    assert ok, bad


# 2 ---------------------------------------------------------------------------------


def test_acceptance_lossy_propagation():
    c = attenuation_check()
    ok = abs(c.rel_error) < 0.02
    report(2, "lossy plane wave", ok, f"alpha {c.value:.4f} vs {c.reference:.4f} Np/m ({c.rel_error:+.2%})")
    assert ok


# 3 ---------------------------------------------------------------------------------


def test_acceptance_mie_absorption():
    c = mie_check()
    ok = abs(c.rel_error) < 0.05
    report(3, "Mie absorption", ok, f"C_abs {c.value:.5g} vs {c.reference:.5g} m^2 ({c.rel_error:+.2%})")
    assert ok


# 4 ---------------------------------------------------------------------------------


def test_acceptance_free_space_dipole():
    r = hertzian_dipole_check()
    ok = (abs(r["directivity_dbi"] - 1.76) <= 0.2 and abs(r["efficiency"] - 1) <= 0.02
          and r["surface_spread"] < 0.01)
    report(4, "free-space dipole", ok,
           f"D {r['directivity_dbi']:.3f} dBi, eta {r['efficiency']:.4f}, box spread {r['surface_spread']:.2e}")
    assert ok


# 5 ---------------------------------------------------------------------------------


def test_acceptance_power_balance():
    runs = phantom_runs()
    errs = {name: run.radiation.balance_error for name, run in runs.items() if run.converged}
    skipped = sorted(set(runs) - set(errs))
    worst = max(errs, key=errs.get)
    ok = errs[worst] < 0.02
    report(5, "power balance", ok, f"{len(errs)} converged phantom runs, worst {worst} {errs[worst]:.2e}"
           + (f"; not converged (excluded): {', '.join(skipped)}" if skipped else ""))
    assert ok


# 6 ---------------------------------------------------------------------------------


def test_acceptance_series_rlc_port():
    r = rlc_port_check()
    ok = r["converged"] and r["max_mag_error"] < 0.01 and r["max_phase_error_deg"] < 1.0
    report(6, "series RLC port", ok,
           f"max |S11| error {r['max_mag_error']:.2%}, max phase error {r['max_phase_error_deg']:.3f} deg")
    assert ok


# 7 ---------------------------------------------------------------------------------


def test_acceptance_tissue_discrimination():
    runs = {t: wire_run(t, 0.2) for t in ("ST", "SI", "LI")}
    eta = {t: r.radiation.efficiency for t, r in runs.items()}
    phase = {t: math.degrees(np.angle(r.s11_at(F0))) for t, r in runs.items()}
    sep = {f"{a}-{b}": phase_difference(phase[a], phase[b]) for a, b in (("ST", "SI"), ("SI", "LI"), ("ST", "LI"))}
    order = eta["SI"] < eta["ST"] and eta["SI"] < eta["LI"]
    apart = min(sep.values()) > 5.0
    model = ClassifierModel(phase, threshold=0.5 * min(sep.values()))
    labels = {t: classify_tissue(p, model).label for t, p in phase.items()}
    own = all(labels[t] == t for t in phase)
    ok = order and apart and own and all(r.converged for r in runs.values())
    report(7, "tissue discrimination", ok,
           "eta " + ", ".join(f"{t} {v:.3g}" for t, v in eta.items())
           + "; phase " + ", ".join(f"{t} {v:.1f}" for t, v in phase.items())
           + "; separations " + ", ".join(f"{k} {v:.1f}" for k, v in sep.items())
           + f"; classified {labels}")
    assert ok


# 8 ---------------------------------------------------------------------------------


def test_acceptance_shell_thickness_trend():
    thin, nominal = wire_run("GI_avg", 0.05), wire_run("GI_avg", 0.2)
    e0, e1 = thin.radiation.efficiency, nominal.radiation.efficiency
    ok = thin.converged and nominal.converged and e1 > 1.1 * e0
    report(8, "shell thickness", ok, f"eta(0.2) {e1:.4g} vs eta(0.05) {e0:.4g} (ratio {e1 / e0:.3f})")
    assert ok


# 9 ---------------------------------------------------------------------------------


def test_acceptance_bound_properties():
    g = BoundGeometry()
    sig = np.linspace(0.0, 3.0, 31)
    lossless = [efficiency_bound(k, g, 63.0, 0.0, F0) for k in ("electric", "magnetic")]
    mono = all(np.all(np.diff([efficiency_bound(k, g, 63.0, s, F0) for s in sig]) < 0)
               for k in ("electric", "magnetic"))
    order = {f: frequency_bounds("GI_avg", f) for f in (403e6, 434e6)}
    mag = all(bm > be for be, bm in order.values())
    ok = all(abs(v - 1.0) < 1e-12 for v in lossless) and mono and mag
    report(9, "bound properties", ok,
           f"eta(sigma=0) {lossless}, strictly decreasing {mono}, "
           + ", ".join(f"{f / 1e6:.0f} MHz e {be:.3g} m {bm:.3g}" for f, (be, bm) in order.items()))
    assert ok


# 10 --------------------------------------------------------------------------------

SMALL = """[phantom]
diameter_mm = 36
material = SI
[antenna]
kind = wire
length_mm = 20
feed_gap_mm = 2
[solver]
cell_size_mm = 2
courant_factor = 0.99
"""


def test_acceptance_determinism_passivity_stability():
    cfg = parse_config(SMALL)
    a, b = run_config(cfg), run_config(cfg)
    same = (a.result.record.v.tobytes() == b.result.record.v.tobytes()
            and a.s11.tobytes() == b.s11.tobytes() and a.grid.content_hash() == b.grid.content_hash())

    worst = {}
    for p in SHIPPED:
        run = shipped_run(p.stem)
        worst[p.stem] = float(np.max(np.abs(run.s11)))
    passive = all(v <= 1 + 1e-3 for v in worst.values())

    grid = voxelize(cfg.scene, cfg.solver.cell_size)
    sim = Simulation(grid.to_medium(), cfg.solver.sim, grid.lumped_port())
    for _ in range(100_000):
        sim.step()
    stable = sim.finite() and sim.n == 100_000
    ok = same and passive and stable
    report(10, "determinism, passivity, stability", ok,
           f"byte-identical repeat {same}; max |S11| " + ", ".join(f"{k} {v:.4f}" for k, v in worst.items())
           + f"; 1e5 steps at courant {cfg.solver.sim.courant_factor} finite {stable}")
    assert ok
