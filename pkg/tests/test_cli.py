from __future__ import annotations

import json

import numpy as np
import pytest
from conftest import synthetic_sweeps

from capsule_em.analysis.io import write_sweep_csv
from capsule_em.cli import EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VALIDATION, main

TINY = """[phantom]
diameter_mm = 36
material = SI
[antenna]
kind = wire
length_mm = 20
feed_gap_mm = 2
[solver]
cell_size_mm = 2
max_steps = {steps}
"""


def _write_sweeps(tmp_path, sweeps):
    paths = {}
    for t, sw in sweeps.items():
        paths[t] = tmp_path / f"{t}.csv"
        write_sweep_csv(paths[t], sw.f, sw.s11)
    return paths


def test_table(capsys, tmp_path):
    assert main(["table", "-o", str(tmp_path / "t.csv")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "loop" in out and "35.6" in out
    assert (tmp_path / "t.csv").exists()


def test_metrics_synthetic(tmp_path, capsys):
    sw = synthetic_sweeps({"ST": -131.5, "SI": 91.1, "LI": -110.5}, 454.4, 418.8, 446.4, 422.0)
    p = _write_sweeps(tmp_path, sw)
    rc = main(["metrics", "--st", str(p["ST"]), "--si", str(p["SI"]), "--li", str(p["LI"]),
               "--antenna", "loop", "-o", str(tmp_path / "m")])
    assert rc == EXIT_OK
    doc = json.loads((tmp_path / "m" / "metrics.json").read_text())
    assert round(doc["delta_fi"], 1) == 35.6
    assert round(doc["phase_diff"]["ST-SI"], 1) == 137.4
    assert round(doc["phase_diff"]["SI-LI"], 1) == 158.4
    assert round(doc["fc_diff"], 1) == 24.4
    assert doc["f_resolution_hz"] == pytest.approx(1e5)
    assert (tmp_path / "m" / "metrics.csv").read_text().startswith("antenna,")


def test_metrics_never_matched(tmp_path):
    f = np.linspace(380e6, 480e6, 11)
    p = {}
    for t in ("ST", "SI", "LI"):
        p[t] = tmp_path / f"{t}.csv"
        write_sweep_csv(p[t], f, np.full(11, 0.9 + 0j))
    rc = main(["metrics", "--st", str(p["ST"]), "--si", str(p["SI"]), "--li", str(p["LI"]),
               "-o", str(tmp_path / "m")])
    assert rc == EXIT_OK
    doc = json.loads((tmp_path / "m" / "metrics.json").read_text())
    assert doc["delta_fi"] is None and doc["delta_fi_empty"] is True


def test_metrics_mismatched_grid(tmp_path, capsys):
    f = np.linspace(380e6, 480e6, 11)
    s = np.full(11, 0.5 + 0j)
    for t, ff in (("ST", f), ("SI", f), ("LI", f + 1e5)):
        write_sweep_csv(tmp_path / f"{t}.csv", ff, s)
    rc = main(["metrics", "--st", str(tmp_path / "ST.csv"), "--si", str(tmp_path / "SI.csv"),
               "--li", str(tmp_path / "LI.csv"), "-o", str(tmp_path / "m")])
    assert rc == EXIT_VALIDATION
    err = capsys.readouterr().err
    assert "LI.csv" in err and "SI.csv" not in err


def test_metrics_missing_file(tmp_path):
    assert main(["metrics", "--st", "a", "--si", "b", "--li", "c", "-o", str(tmp_path)]) == EXIT_ERROR


def test_oracles(tmp_path, capsys):
    assert main(["oracle", "planewave", "-o", str(tmp_path / "pw.json")]) == EXIT_OK
    assert json.loads((tmp_path / "pw.json").read_text())["alpha_np_per_m"] > 0
    assert main(["oracle", "mie", "-o", str(tmp_path / "mie.json")]) == EXIT_OK
    doc = json.loads((tmp_path / "mie.json").read_text())
    assert doc["c_abs_m2"] == pytest.approx(0.00536781603667, rel=1e-6)
    assert main(["oracle", "bound", "--f-list", "434e6", "-o", str(tmp_path / "b.csv")]) == EXIT_OK
    capsys.readouterr()
    assert main(["oracle", "circuit", "--R", "50", "--n", "3"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all("dB" in ln for ln in lines)


def test_classify(capsys, tmp_path):
    assert main(["classify", "-62", "--references", "ST=-64.5,SI=20.1,LI=-74.4"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "ST"
    assert main(["classify", "150", "--references", "ST=-64.5,SI=20.1,LI=-74.4"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "unclassified"
    (tmp_path / "m.json").write_text("{broken")
    assert main(["classify", "0", "--model", str(tmp_path / "m.json")]) == EXIT_VALIDATION
    assert main(["classify", "0"]) == EXIT_VALIDATION


def test_bad_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.ini"
    p.write_text("[capsule]\nshell_thickness_mm = 7\n")
    assert main(["simulate", str(p), "-o", str(tmp_path / "run")]) == EXIT_VALIDATION
    assert "[capsule] shell_thickness_mm" in capsys.readouterr().err
    p.write_text("[capsule]\ncolour = red\n")
    assert main(["simulate", str(p), "-o", str(tmp_path / "run")]) == EXIT_VALIDATION
    assert main(["simulate", str(tmp_path / "missing.ini")]) == EXIT_ERROR


def test_usage_error():
    with pytest.raises(SystemExit) as e:
        main(["simulate"])
    assert e.value.code == 2


@pytest.fixture(scope="module")
def tiny_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("sim")
    cfg = base / "tiny.ini"
    cfg.write_text(TINY.format(steps=40000))
    rcs = [main(["simulate", str(cfg), "-o", str(base / f"r{k}"), "--dump-grid"]) for k in (1, 2)]
    short = base / "short.ini"
    short.write_text(TINY.format(steps=200))
    rc_short = main(["simulate", str(short), "-o", str(base / "short")])
    return base, rcs, rc_short


def test_simulate_outputs(tiny_runs):
    base, rcs, _ = tiny_runs
    assert rcs == [EXIT_OK, EXIT_OK]
    man = json.loads((base / "r1" / "manifest.json").read_text())
    for name in man["outputs"]:
        assert (base / "r1" / name).exists()
    assert {"port.csv", "s11.csv", "radiation.json", "pattern.csv", "grid.bin"} <= set(man["outputs"])
    assert man["converged"] is True and man["grid"]["cell_size_mm"] == 2.0
    assert man["realized_feed_gap_mm"] == 2.0
    s = np.loadtxt(base / "r1" / "s11.csv", delimiter=",", skiprows=1)
    assert s[0, 0] == 380e6 and s[-1, 0] == 480e6


def test_simulate_byte_identical(tiny_runs):
    base, _, _ = tiny_runs
    for name in ("s11.csv", "port.csv", "pattern.csv", "grid.bin", "manifest.json"):
        assert (base / "r1" / name).read_bytes() == (base / "r2" / name).read_bytes()


def test_simulate_not_converged(tiny_runs):
    base, _, rc = tiny_runs
    assert rc == EXIT_NOT_CONVERGED
    assert json.loads((base / "short" / "manifest.json").read_text())["converged"] is False
