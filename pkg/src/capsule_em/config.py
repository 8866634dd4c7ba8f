"""Structured plain-text run configuration (INI syntax).

Sections and keys (units in the key names)::

    [phantom]   diameter_mm, material, variant
    [capsule]   length_mm, diameter_mm, shell_thickness_mm, shell_material,
                filler_material, substrate_thickness_um, substrate_material
    [antenna]   kind = dipole | loop | patch | wire | none
                dimensions = table | custom   (table: optimised set nearest to t)
                plus the custom parameters of the chosen kind
    [port]      z0_ohm, series_inductance_nh
    [solver]    cell_size_mm, padding_cells, courant_factor, max_steps,
                decay_threshold_db, center_hz, bandwidth_hz, cpml_layers,
                precision, subcell, workers, f_start_hz, f_stop_hz, f_step_hz
    [sweep]     thickness_mm (list), frequencies_hz (list), workers

Unknown sections or keys are errors naming the offending section and key.
"""
from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry.outline import (
    DipoleParams, GeometryError, LoopParams, PatchParams, WireDipoleParams, optimized_params,
)
from .geometry.scene import PHANTOM_VARIANTS, CapsuleSpec, PortSpec, Scene
from .solver.config import ConfigError, GaussianPulse, SimulationConfig


class ConfigFileError(ConfigError):
    """Configuration file problem, tagged with section and key."""

    def __init__(self, section: str, key: str | None, message: str):
        where = f"[{section}]" + (f" {key}" if key else "")
        super().__init__(f"{where}: {message}")
        self.section = section
        self.key = key


_ANTENNA_KEYS = {
    "dipole": {"length_mm": "length", "width_mm": "width", "trace_width_mm": "trace_width",
               "feed_offset_mm": "feed_offset", "meander_count": "meander_count", "feed_gap_mm": "feed_gap"},
    "loop": {"length_mm": "length", "width_mm": "width", "trace_width_mm": "trace_width",
             "meander_count": "meander_count", "feed_gap_mm": "feed_gap"},
    "patch": {"l1_mm": "l1", "lc_mm": "lc", "w1_mm": "w1", "w2_mm": "w2", "wc_mm": "wc", "ws_mm": "ws",
              "ground_u_mm": None, "ground_v_mm": None, "spline_x": "spline_x"},
    "wire": {"length_mm": "length", "feed_gap_mm": "feed_gap"},
    "none": {},
}
_PARAM_TYPES = {"dipole": DipoleParams, "loop": LoopParams, "patch": PatchParams, "wire": WireDipoleParams}

_SCHEMA = {
    "phantom": {"diameter_mm", "material", "variant"},
    "capsule": {"length_mm", "diameter_mm", "shell_thickness_mm", "shell_material", "filler_material",
                "substrate_thickness_um", "substrate_material"},
    "antenna": {"kind", "dimensions"} | {k for v in _ANTENNA_KEYS.values() for k in v},
    "port": {"z0_ohm", "series_inductance_nh"},
    "solver": {"cell_size_mm", "padding_cells", "courant_factor", "max_steps", "decay_threshold_db",
               "center_hz", "bandwidth_hz", "cpml_layers", "precision", "subcell", "workers",
               "f_start_hz", "f_stop_hz", "f_step_hz"},
    "sweep": {"thickness_mm", "frequencies_hz", "workers"},
}


@dataclass(frozen=True)
class SolverOptions:
    cell_size: float = 1.0  # mm
    padding: int = 10
    subcell: bool = True
    workers: int | None = None
    f_start: float = 380e6
    f_stop: float = 480e6
    f_step: float = 1e6
    sim: SimulationConfig = field(default_factory=lambda: SimulationConfig(
        excitation=GaussianPulse(434e6, 600e6), precision="single"))

    def frequencies(self) -> np.ndarray:
        n = int(round((self.f_stop - self.f_start) / self.f_step))
        return self.f_start + self.f_step * np.arange(n + 1)


@dataclass(frozen=True)
class SweepOptions:
    thickness: tuple[float, ...] = tuple(np.round(np.arange(1, 21) * 0.05, 2))
    frequencies: tuple[float, ...] = (403e6, 434e6, 868e6, 915e6, 1400e6, 2450e6)
    workers: int = 1


@dataclass(frozen=True)
class RunConfig:
    scene: Scene
    solver: SolverOptions
    sweep: SweepOptions
    dimension_set: str = "custom"  # "table t=..." when dimensions come from the optimised tables
    text: str = ""

    @property
    def scene_hash(self) -> str:
        """SHA-256 of the normalised configuration text (line endings and trailing blanks)."""
        norm = "\n".join(line.rstrip() for line in self.text.replace("\r\n", "\n").split("\n")).strip()
        return hashlib.sha256(norm.encode()).hexdigest()

    def with_thickness(self, t: float) -> "RunConfig":
        """Same run with shell thickness ``t``; table dimensions follow the nearest optimised set."""
        cap = replace(self.scene.capsule, shell_thickness=t)
        antenna = self.scene.antenna
        label = self.dimension_set
        if label.startswith("table") and antenna is not None and not isinstance(antenna, WireDipoleParams):
            kind = {DipoleParams: "dipole", LoopParams: "loop", PatchParams: "patch"}[type(antenna)]
            key, antenna = optimized_params(kind, t)
            label = f"table t={key:g}"
        scene = replace(self.scene, capsule=cap, antenna=antenna)
        return replace(self, scene=scene, dimension_set=label)

    def with_frequency(self, f: float) -> "RunConfig":
        sim = self.solver.sim
        exc = replace(sim.excitation, center=f, bandwidth=min(sim.excitation.bandwidth, 1.2 * f))
        span = 0.5 * (self.solver.f_stop - self.solver.f_start)
        solver = replace(self.solver, sim=replace(sim, excitation=exc),
                         f_start=max(f - span, exc.band[0]), f_stop=min(f + span, exc.band[1]))
        return replace(self, solver=solver)


def _num(section, key, raw, kind=float):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigFileError(section, key, f"cannot parse {raw!r} as {kind.__name__}") from None


def _list(section, key, raw):
    return tuple(_num(section, key, x.strip()) for x in raw.replace(";", ",").split(",") if x.strip())


def _bool(section, key, raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigFileError(section, key, f"expected a boolean, got {raw!r}")


def parse_config(text: str) -> RunConfig:
    """Parse and validate configuration text."""
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigFileError("file", None, str(exc).splitlines()[0]) from None
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigFileError(sec, None, "unknown section")
        for key in cp[sec]:
            if key not in _SCHEMA[sec]:
                raise ConfigFileError(sec, key, "unknown key")
    get = lambda s, k, d=None: cp[s].get(k, d) if cp.has_section(s) else d  # noqa: E731

    cap_kw = {}
    for key, attr in (("length_mm", "length"), ("diameter_mm", "diameter"), ("shell_thickness_mm", "shell_thickness")):
        if get("capsule", key) is not None:
            cap_kw[attr] = _num("capsule", key, get("capsule", key))
    for key in ("shell_material", "filler_material"):
        if get("capsule", key) is not None:
            cap_kw[key] = get("capsule", key)
    try:
        capsule = CapsuleSpec(**cap_kw)
    except GeometryError as exc:
        raise ConfigFileError("capsule", "shell_thickness_mm" if "shell_thickness" in str(exc) else None,
                              str(exc)) from None

    antenna, label = _parse_antenna(cp, get, capsule.shell_thickness)
    scene_kw = {"capsule": capsule, "antenna": antenna}
    if get("phantom", "diameter_mm") is not None:
        scene_kw["phantom_diameter"] = _num("phantom", "diameter_mm", get("phantom", "diameter_mm"))
    if get("phantom", "material") is not None:
        scene_kw["phantom_material"] = get("phantom", "material")
    if get("phantom", "variant") is not None:
        v = get("phantom", "variant")
        if v not in PHANTOM_VARIANTS:
            raise ConfigFileError("phantom", "variant", f"must be one of {', '.join(PHANTOM_VARIANTS)}")
        scene_kw["phantom_variant"] = v
    if get("capsule", "substrate_thickness_um") is not None:
        scene_kw["substrate_thickness"] = _num("capsule", "substrate_thickness_um", get("capsule", "substrate_thickness_um"))
    if get("capsule", "substrate_material") is not None:
        scene_kw["substrate_material"] = get("capsule", "substrate_material")
    port_kw = {}
    for key, attr in (("z0_ohm", "z0"), ("series_inductance_nh", "series_inductance")):
        if get("port", key) is not None:
            port_kw[attr] = _num("port", key, get("port", key))
    if port_kw:
        try:
            scene_kw["port"] = PortSpec(**port_kw)
        except GeometryError as exc:
            key = "series_inductance_nh" if "inductance" in str(exc) else "z0_ohm"
            raise ConfigFileError("port", key, str(exc)) from None
    try:
        scene = Scene(**scene_kw)
    except GeometryError as exc:
        raise ConfigFileError("phantom" if "phantom" in str(exc) or "material" in str(exc) else "antenna",
                              None, str(exc)) from None

    solver = _parse_solver(get)
    sweep = SweepOptions()
    if get("sweep", "thickness_mm") is not None:
        sweep = replace(sweep, thickness=_list("sweep", "thickness_mm", get("sweep", "thickness_mm")))
    if get("sweep", "frequencies_hz") is not None:
        sweep = replace(sweep, frequencies=_list("sweep", "frequencies_hz", get("sweep", "frequencies_hz")))
    if get("sweep", "workers") is not None:
        sweep = replace(sweep, workers=_num("sweep", "workers", get("sweep", "workers"), int))
    return RunConfig(scene, solver, sweep, label, text)


def _parse_antenna(cp, get, t):
    kind = get("antenna", "kind", "none")
    if kind not in _ANTENNA_KEYS:
        raise ConfigFileError("antenna", "kind", f"unknown antenna kind {kind!r}")
    allowed = _ANTENNA_KEYS[kind]
    if cp.has_section("antenna"):
        for key in cp["antenna"]:
            if key not in ("kind", "dimensions") and key not in allowed:
                raise ConfigFileError("antenna", key, f"not a parameter of a {kind} antenna")
    if kind == "none":
        return None, "none"
    mode = get("antenna", "dimensions", "table" if kind != "wire" else "custom")
    if mode not in ("table", "custom"):
        raise ConfigFileError("antenna", "dimensions", "must be 'table' or 'custom'")
    if mode == "table":
        if kind == "wire":
            raise ConfigFileError("antenna", "dimensions", "the wire dipole has no optimised table")
        key, base = optimized_params(kind, t)
        label = f"table t={key:g}"
    else:
        base = _PARAM_TYPES[kind]()
        label = "custom"
    kw = {}
    for key, attr in allowed.items():
        raw = get("antenna", key)
        if raw is None:
            continue
        if attr == "spline_x":
            vals = _list("antenna", key, raw)
            kw["spline_x"] = vals
        elif attr is None:
            gu, gv = kw.get("ground_size", base.ground_size)
            val = _num("antenna", key, raw)
            kw["ground_size"] = (val, gv) if key == "ground_u_mm" else (gu, val)
        elif attr == "meander_count":
            kw[attr] = _num("antenna", key, raw, int)
        else:
            kw[attr] = _num("antenna", key, raw)
    if kw:
        label = "custom" if mode == "custom" else label + " (overridden)"
    try:
        return replace(base, **kw), label
    except GeometryError as exc:
        raise ConfigFileError("antenna", None, str(exc)) from None


def _parse_solver(get) -> SolverOptions:
    s = "solver"
    opt = SolverOptions()
    sim = opt.sim
    exc = sim.excitation
    kw = {}
    if get(s, "cell_size_mm") is not None:
        kw["cell_size"] = _num(s, "cell_size_mm", get(s, "cell_size_mm"))
        if kw["cell_size"] <= 0:
            raise ConfigFileError(s, "cell_size_mm", "must be > 0")
    if get(s, "padding_cells") is not None:
        kw["padding"] = _num(s, "padding_cells", get(s, "padding_cells"), int)
        if kw["padding"] < 10:
            raise ConfigFileError(s, "padding_cells", "must be >= 10")
    if get(s, "subcell") is not None:
        kw["subcell"] = _bool(s, "subcell", get(s, "subcell"))
    if get(s, "workers") is not None:
        kw["workers"] = _num(s, "workers", get(s, "workers"), int)
    for key, attr in (("f_start_hz", "f_start"), ("f_stop_hz", "f_stop"), ("f_step_hz", "f_step")):
        if get(s, key) is not None:
            kw[attr] = _num(s, key, get(s, key))
    exc_kw = {}
    if get(s, "center_hz") is not None:
        exc_kw["center"] = _num(s, "center_hz", get(s, "center_hz"))
    if get(s, "bandwidth_hz") is not None:
        exc_kw["bandwidth"] = _num(s, "bandwidth_hz", get(s, "bandwidth_hz"))
    sim_kw = {}
    for key, attr, kind in (("courant_factor", "courant_factor", float), ("max_steps", "max_steps", int),
                            ("decay_threshold_db", "decay_threshold", float), ("cpml_layers", "cpml_layers", int)):
        if get(s, key) is not None:
            sim_kw[attr] = _num(s, key, get(s, key), kind)
    if get(s, "precision") is not None:
        sim_kw["precision"] = get(s, "precision")
    try:
        exc = replace(exc, **exc_kw)
        sim = replace(sim, excitation=exc, **sim_kw)
    except ConfigError as exc_:
        raise ConfigFileError(s, None, str(exc_)) from None
    opt = replace(opt, sim=sim, **kw)
    if opt.f_step <= 0 or opt.f_stop < opt.f_start:
        raise ConfigFileError(s, "f_step_hz", "frequency grid must ascend with a positive step")
    if not exc.in_band([opt.f_start, opt.f_stop]):
        raise ConfigFileError(s, "f_start_hz", f"S11 grid exceeds the excitation band {exc.band}")
    return opt


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
