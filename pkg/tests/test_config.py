from __future__ import annotations

import pytest

from capsule_em.config import ConfigFileError, load_config, parse_config
from capsule_em.geometry.outline import DIPOLE_TABLE, LoopParams, WireDipoleParams


def test_defaults():
    cfg = parse_config("")
    assert cfg.scene.antenna is None
    assert cfg.scene.phantom_material == "GI_avg"
    assert cfg.solver.cell_size == 1.0
    assert cfg.solver.frequencies()[0] == 380e6 and cfg.solver.frequencies()[-1] == 480e6


def test_unknown_section():
    with pytest.raises(ConfigFileError) as e:
        parse_config("[mesh]\nsize = 1\n")
    assert e.value.section == "mesh" and "[mesh]" in str(e.value)


def test_unknown_key():
    with pytest.raises(ConfigFileError) as e:
        parse_config("[solver]\ncell_size = 1\n")
    assert (e.value.section, e.value.key) == ("solver", "cell_size")


def test_key_of_other_antenna_kind():
    with pytest.raises(ConfigFileError, match="w1_mm"):
        parse_config("[antenna]\nkind = dipole\nw1_mm = 3\n")


def test_shell_thickness_too_large():
    with pytest.raises(ConfigFileError) as e:
        parse_config("[capsule]\nshell_thickness_mm = 7\n")
    assert e.value.key == "shell_thickness_mm"
    assert "0 < t < diameter/2" in str(e.value)


def test_bad_number():
    with pytest.raises(ConfigFileError, match="cannot parse"):
        parse_config("[solver]\nmax_steps = many\n")


def test_table_dimensions_follow_thickness():
    cfg = parse_config("[antenna]\nkind = dipole\n[capsule]\nshell_thickness_mm = 0.45\n")
    assert cfg.scene.antenna == DIPOLE_TABLE[0.4]
    assert cfg.dimension_set == "table t=0.4"
    assert cfg.with_thickness(0.6).scene.antenna == DIPOLE_TABLE[0.6]


def test_custom_dimensions():
    cfg = parse_config("[antenna]\nkind = loop\ndimensions = custom\nlength_mm = 9\nmeander_count = 5\n")
    assert cfg.scene.antenna == LoopParams(length=9.0, meander_count=5)
    assert cfg.dimension_set == "custom"
    assert cfg.with_thickness(0.6).scene.antenna == cfg.scene.antenna


def test_wire_and_series_inductance():
    cfg = parse_config("[antenna]\nkind = wire\nlength_mm = 20\nfeed_gap_mm = 1\n"
                       "[port]\nseries_inductance_nh = 48\n")
    assert cfg.scene.antenna == WireDipoleParams(20.0, 1.0)
    assert cfg.scene.port.series_inductance == 48.0
    with pytest.raises(ConfigFileError) as e:
        parse_config("[port]\nseries_inductance_nh = -1\n")
    assert e.value.key == "series_inductance_nh"


def test_phantom_variant():
    assert parse_config("[phantom]\nvariant = measured\n").scene.phantom_variant == "measured"
    with pytest.raises(ConfigFileError):
        parse_config("[phantom]\nvariant = fresh\n")


def test_grid_outside_band():
    with pytest.raises(ConfigFileError, match="excitation band"):
        parse_config("[solver]\nf_stop_hz = 900e6\n")


def test_scene_hash_normalised():
    a = parse_config("[antenna]\nkind = dipole\n")
    b = parse_config("[antenna]   \r\nkind = dipole  \r\n\n")
    c = parse_config("[antenna]\nkind = loop\n")
    assert a.scene_hash == b.scene_hash != c.scene_hash


def test_with_frequency_recentres():
    cfg = parse_config("").with_frequency(2450e6)
    exc = cfg.solver.sim.excitation
    assert exc.center == 2450e6
    assert exc.in_band([cfg.solver.f_start, cfg.solver.f_stop])


def test_sweep_lists():
    cfg = parse_config("[sweep]\nthickness_mm = 0.05, 0.2; 0.5\nfrequencies_hz = 434e6\n")
    assert cfg.sweep.thickness == (0.05, 0.2, 0.5)
    assert cfg.sweep.frequencies == (434e6,)


def test_load_from_file(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[antenna]\nkind = patch\n")
    assert load_config(p).dimension_set == "table t=0.2"
