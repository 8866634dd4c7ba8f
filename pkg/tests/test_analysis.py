from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from conftest import synthetic_sweeps
from hypothesis import given, settings
from hypothesis import strategies as st

from capsule_em.analysis.classify import (
    CalibrationWarning, ClassifierModel, calibrate_offset, classify_tissue,
)
from capsule_em.analysis.io import load_table, read_sweep_csv, write_sweep_csv, write_table_csv
from capsule_em.analysis.metrics import (
    FrequencySweep, MetricError, RangeError, center_frequency, compute_metrics, derive_metrics,
    matched_bands, matched_interval, phase_at, phase_difference, wrap_deg,
)
from capsule_em.analysis.sweeps import SweepPoint, sweep_frequencies, sweep_shell_thickness, thickness_extrema

angles = st.floats(-720, 720, allow_nan=False)


def test_wrap():
    assert wrap_deg(-180.0) == 180.0
    assert wrap_deg(190.0) == -170.0
    assert wrap_deg(540.0) == 180.0


def test_phase_difference_examples():
    assert phase_difference(-131.5, 91.1) == pytest.approx(137.4)
    assert phase_difference(91.1, -110.5) == pytest.approx(158.4)
    assert phase_difference(170, -170) == pytest.approx(20)


@given(angles, angles)
def test_phase_difference_symmetric(a, b):
    d = phase_difference(a, b)
    assert 0 <= d <= 180
    assert d == pytest.approx(phase_difference(b, a), abs=1e-9)


@given(angles, angles, angles)
def test_phase_difference_triangle(a, b, c):
    assert phase_difference(a, c) <= phase_difference(a, b) + phase_difference(b, c) + 1e-9


def _sweep(f, db, phase=0.0):
    return FrequencySweep("a", "ST", 0.2, f, 10 ** (np.asarray(db) / 20) * np.exp(1j * np.radians(phase)))


def test_phase_at_interpolates_unwrapped():
    f = np.array([1.0, 2.0, 3.0])
    s = np.exp(1j * np.radians([170.0, -170.0, -150.0]))
    sw = FrequencySweep("a", "ST", 0.2, f, s)
    assert phase_at(sw, 1.5) == pytest.approx(180.0)
    with pytest.raises(RangeError):
        phase_at(sw, 4.0)


def test_matched_band_linear_in_db():
    f = np.array([400.0, 410.0, 420.0, 430.0])
    sw = _sweep(f, [-5.0, -15.0, -15.0, -5.0])
    (b,) = matched_bands(sw)
    assert b.lower == pytest.approx(405.0)
    assert b.upper == pytest.approx(425.0)


def test_matched_interval_empty_and_disjoint():
    f = np.linspace(400, 440, 5)
    never = {"ST": _sweep(f, [-5] * 5), "SI": _sweep(f, [-20] * 5)}
    mi = matched_interval(never)
    assert mi.empty and "unmatched" in mi.flags
    a = _sweep(f, [-20, -20, -5, -5, -5])
    b = _sweep(f, [-5, -5, -5, -20, -20])
    mi = matched_interval({"ST": a, "SI": b})
    assert mi.empty and "disjoint" in mi.flags


def test_matched_interval_grid_mismatch():
    with pytest.raises(MetricError):
        matched_interval({"ST": _sweep([1.0, 2.0], [-20, -20]), "SI": _sweep([1.0, 3.0], [-20, -20])})


def test_multiband_uses_band_with_fc():
    f = np.arange(400.0, 451.0, 5.0)
    db = [-5, -12, -5, -5, -5, -5, -20, -30, -20, -5, -5]
    mi = matched_interval({"ST": _sweep(f, db)})
    assert "multiband:ST" in mi.flags
    assert mi.fi2 > 425 and mi.fi1 < 450


def test_center_frequency_symmetric():
    f = np.linspace(424.0, 444.0, 21)
    db = -10 - 20 * np.exp(-((f - 434.0) / 3) ** 2)
    assert center_frequency(_sweep(f, db)) == pytest.approx(434.0, abs=1e-9)


def test_center_frequency_skewed_lorentzian():
    # two Lorentzian dips; the minimum of |S11| in dB is found on a dense grid
    def mag_db(f):
        s = 1 - 0.6 / (1 + ((f - 434.0) / 4.0) ** 2) - 0.3 / (1 + ((f - 438.0) / 6.0) ** 2)
        return 20 * np.log10(np.abs(s))

    dense = np.linspace(420, 450, 300001)
    ref = dense[np.argmin(mag_db(dense))]
    f = np.linspace(380, 480, 1001)
    assert center_frequency(_sweep(f, mag_db(f))) == pytest.approx(ref, abs=0.05)


def test_center_frequency_requires_dip():
    with pytest.raises(MetricError):
        center_frequency(_sweep(np.linspace(1, 2, 5), [-3] * 5))


@settings(max_examples=30)
@given(st.floats(0.05, 0.95))
def test_center_frequency_scale_invariant(scale):
    f = np.linspace(420.0, 450.0, 31)
    db = -10 - 20 * np.exp(-((f - 433.3) / 4) ** 2)
    sw = _sweep(f, db)
    scaled = FrequencySweep("a", "ST", 0.2, f, sw.s11 * scale)
    assert center_frequency(scaled, threshold_db=0.0) == pytest.approx(center_frequency(sw), abs=1e-9)


@settings(max_examples=30)
@given(st.floats(-30.0, -10.0), st.floats(0.0, 10.0))
def test_matched_interval_monotone_in_threshold(th, extra):
    f = np.linspace(400.0, 460.0, 61)
    sw = {"ST": _sweep(f, -8 - 30 * np.exp(-((f - 430) / 8) ** 2)),
          "SI": _sweep(f, -8 - 25 * np.exp(-((f - 433) / 10) ** 2))}
    a = matched_interval(sw, th)
    b = matched_interval(sw, th - extra)
    assert b.width <= a.width + 1e-9


def test_derive_metrics_examples():
    m = derive_metrics({"ST": -131.5, "SI": 91.1, "LI": -110.5}, 454.4, 418.8, fc1=446.4, fc2=422.0)
    assert round(m.delta_fi, 1) == 35.6
    assert round(m.phase_diff["ST-SI"], 1) == 137.4
    assert round(m.phase_diff["SI-LI"], 1) == 158.4
    m = derive_metrics({"ST": -64.5, "SI": 20.1, "LI": -74.4}, 441.4, 426.7, fc1=441.4, fc2=425.7)
    assert round(m.fc_diff, 1) == 15.7
    m = derive_metrics({"ST": 0, "SI": 0, "LI": 0}, 441.7, 429.3)
    assert round(m.delta_fi, 1) == 12.4


def test_compute_metrics_from_synthetic_sweeps():
    sw = synthetic_sweeps({"ST": -131.5, "SI": 91.1, "LI": -110.5}, 454.4, 418.8, 446.4, 422.0)
    m = compute_metrics(sw)
    assert round(m.fi1, 1) == 454.4 and round(m.fi2, 1) == 418.8
    assert round(m.delta_fi, 1) == 35.6
    assert round(m.fc1, 1) == 446.4 and round(m.fc2, 1) == 422.0
    assert round(m.fc_diff, 1) == 24.4
    assert m.phase_434["ST"] == pytest.approx(-131.5)


def test_compute_metrics_unmatched_marker():
    f = np.linspace(380e6, 480e6, 11)
    sw = {t: FrequencySweep("a", t, 0.2, f, np.full(11, 0.9 + 0j)) for t in ("ST", "SI", "LI")}
    m = compute_metrics(sw)
    assert m.delta_fi is None and m.to_dict()["delta_fi_empty"]
    assert "unmatched" in m.flags


def test_shipped_table_loads():
    rows = load_table("sensing_results.csv")
    assert len(rows) == 10
    assert {r["antenna"] for r in rows} == {"dipole", "patch", "loop"}
    ext = load_table("thickness_extrema.csv")
    assert [r["antenna"] for r in ext] == ["dipole", "patch", "loop"]


# -- classifier --------------------------------------------------------------

DIPOLE_REFS = {"ST": -64.5, "SI": 20.1, "LI": -74.4}


def test_classify_examples():
    model = ClassifierModel(DIPOLE_REFS)
    assert classify_tissue(-64.5, model).label == "ST"
    assert classify_tissue(150.0, model).label == "unclassified"
    tie = classify_tissue(-69.45, ClassifierModel(DIPOLE_REFS, threshold=10))
    assert tie.label == "ambiguous" and tie.candidates == ["LI", "ST"]


def test_classifier_noise_trials():
    rng = np.random.default_rng(434)
    model = ClassifierModel(DIPOLE_REFS, threshold=10.0)
    names = list(DIPOLE_REFS)
    correct = 0
    for _ in range(1000):
        t = names[rng.integers(3)]
        correct += classify_tissue(DIPOLE_REFS[t] + rng.uniform(-4, 4), model).label == t
    assert correct == 1000


def test_classify_offset_and_wrap():
    model = ClassifierModel({"A": 175.0, "B": 0.0}, offset=115.0)
    assert classify_tissue(-70.0 + 0.0, model).label == "A"  # -70 - 115 = -185 -> 175


def test_classifier_rejects_coincident_refs():
    with pytest.raises(ValueError):
        ClassifierModel({"A": 10.0, "B": 370.0})


def test_classifier_json_roundtrip(tmp_path):
    m = ClassifierModel(DIPOLE_REFS, 8.0, 3.0)
    m.to_json(tmp_path / "m.json")
    assert ClassifierModel.from_json(tmp_path / "m.json") == m


def test_calibrate_offset():
    sim = {"ST": -64.5, "SI": 20.1, "LI": -74.4}
    assert calibrate_offset(sim, sim) == 0.0
    meas = {k: v + 115.0 for k, v in sim.items()}
    assert calibrate_offset(meas, sim) == pytest.approx(115.0)
    assert calibrate_offset([10.0, -10.0], [0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        calibrate_offset([10.0, -10.0], [0.0, 0.0])
    with pytest.warns(CalibrationWarning):
        calibrate_offset([0.0, 90.0], [0.0, 0.0])


# -- io ----------------------------------------------------------------------


def test_sweep_csv_roundtrip(tmp_path):
    f = np.linspace(380e6, 480e6, 7)
    s = np.exp(1j * f / 1e8) * 0.3
    write_sweep_csv(tmp_path / "s.csv", f, s)
    sw = read_sweep_csv(tmp_path / "s.csv")
    assert np.array_equal(sw.f, f) and np.array_equal(sw.s11, s)


def test_sweep_csv_vna_comments(tmp_path):
    p = tmp_path / "vna.csv"
    p.write_text("! exported\n# comment\nf_hz,re_s11,im_s11\n1e8,0.1,0.2\n2e8,0.3,0.4\n")
    sw = read_sweep_csv(p)
    assert sw.s11[1] == 0.3 + 0.4j


def test_sweep_csv_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("freq,a,b\n1,2,3\n")
    with pytest.raises(ValueError, match="expected columns"):
        read_sweep_csv(p)


def test_table_csv_empty(tmp_path):
    write_table_csv(tmp_path / "e.csv", [])
    assert (tmp_path / "e.csv").read_text().strip() == ""


# -- sweeps with a stub runner --------------------------------------------------


def _stub_runner(cfg, f):
    t = cfg.scene.capsule.shell_thickness
    if t == 0.3:
        return SweepPoint(converged=False, steps=10, s11=0.5 + 0j, gain_dbi=99.0, efficiency=0.9)
    eta = 1e-4 * (1 + t) if cfg.scene.phantom_variant != "broadband" else 1e-3
    return SweepPoint(True, 100, complex(0.1, 0.0) if f < 1e9 else complex(0.9, 0.0),
                      -30 + t, -31 + t, eta, 1e-4)


def _cfg():
    from capsule_em.config import parse_config

    return parse_config("[antenna]\nkind = dipole\ndimensions = table\n[capsule]\nshell_thickness_mm = 0.2\n")


def test_thickness_sweep_rows_and_extrema():
    rows, ext = sweep_shell_thickness(_cfg(), [0.05, 0.2, 0.3, 0.5], runner=_stub_runner)
    assert [r["t_mm"] for r in rows] == [0.05, 0.2, 0.3, 0.5]
    assert rows[0]["dimension_set"] == "table t=0.2"
    assert rows[3]["dimension_set"] == "table t=0.4"
    assert "not_converged" in rows[2]["flags"]
    assert ext["max_gain_t_mm"] == 0.5 and ext["min_eff_t_mm"] == 0.05
    assert ext["max_gain_dbi"] != 99.0


def test_thickness_sweep_deterministic_duplicates():
    rows, _ = sweep_shell_thickness(_cfg(), [0.2, 0.2], runner=_stub_runner)
    assert rows[0] == rows[1]


def test_thickness_extrema_all_failed():
    ext = thickness_extrema([{"t_mm": 0.2, "converged": False, "efficiency": math.nan}], "x")
    assert ext["max_gain_dbi"] is None


def test_frequency_sweep_flags_and_bounds():
    rows = sweep_frequencies(_cfg(), [434e6, 2450e6], runner=_stub_runner)
    assert rows[0]["bound_magnetic"] > rows[0]["bound_electric"]
    assert "untuned" not in rows[0]["flags"]
    assert "untuned" in rows[1]["flags"]
    assert all(r["efficiency"] < max(r["bound_electric"], r["bound_magnetic"]) for r in rows)
