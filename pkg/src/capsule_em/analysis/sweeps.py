"""Shell-thickness and frequency sweep drivers."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from ..config import RunConfig
from ..materials import broadband_properties
from ..oracles.bounds import BoundGeometry, efficiency_bound

log = logging.getLogger(__name__)

THICKNESS_COLUMNS = ["t_mm", "dimension_set", "converged", "steps", "gain_dbi", "realized_gain_dbi",
                     "efficiency", "efficiency_pct", "efficiency_db", "s11_db", "s11_phase_deg",
                     "power_balance_error", "flags", "error"]
FREQUENCY_COLUMNS = ["f_hz", "f_MHz", "converged", "steps", "efficiency", "efficiency_db", "s11_db",
                     "bound_electric", "bound_magnetic", "flags", "error"]
EXTREMA_COLUMNS = ["antenna", "max_gain_t_mm", "max_gain_dbi", "min_gain_t_mm", "min_gain_dbi",
                   "max_eff_t_mm", "max_eff_pct", "min_eff_t_mm", "min_eff_pct"]


@dataclass
class SweepPoint:
    """Outcome of one run of a sweep; ``error`` is set when the run raised."""

    converged: bool = False
    steps: int = 0
    s11: complex = complex("nan")
    gain_dbi: float = math.nan
    realized_gain_dbi: float = math.nan
    efficiency: float = math.nan
    power_balance_error: float = math.nan
    error: str | None = None
    flags: list[str] = field(default_factory=list)


def run_point(cfg: RunConfig, f: float) -> SweepPoint:
    """Default runner: full FDTD run of ``cfg`` with radiation at ``f``."""
    from ..simulate import run_config

    try:
        run = run_config(cfg, f_rad=f)
    except Exception as exc:  # recorded per row, the sweep carries on
        log.warning("sweep point failed: %s", exc)
        return SweepPoint(error=f"{type(exc).__name__}: {exc}", flags=["failed"])
    rad = run.radiation
    return SweepPoint(run.converged, run.result.steps, run.s11_at(f), rad.max_gain_dbi,
                      rad.realized_gain_dbi, rad.efficiency, rad.balance_error, None, list(rad.flags))


def _map(runner, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [runner(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(runner, *j) for j in jobs]
        return [fut.result() for fut in futures]


def _db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def _s11_fields(s11: complex) -> tuple[float, float]:
    a = abs(s11)
    if not math.isfinite(a):
        return math.nan, math.nan
    return 20.0 * math.log10(max(a, 1e-300)), math.degrees(math.atan2(s11.imag, s11.real))


def sweep_shell_thickness(cfg: RunConfig, t_list=None, f: float = 434e6, runner=run_point,
                          workers: int | None = None) -> tuple[list[dict], dict]:
    """One run per shell thickness; returns ``(rows, extrema)``.

    Antenna dimensions follow the optimised set nearest to each ``t`` when the
    template uses table dimensions. Rows are returned in ``t_list`` order.
    """
    t_list = list(cfg.sweep.thickness if t_list is None else t_list)
    cfgs = [cfg.with_thickness(float(t)) for t in t_list]
    points = _map(runner, [(c, f) for c in cfgs], workers or cfg.sweep.workers)
    rows = []
    for t, c, p in zip(t_list, cfgs, points):
        flags = list(p.flags)
        if not p.converged and "failed" not in flags:
            flags.append("not_converged")
        s_db, s_ph = _s11_fields(p.s11)
        rows.append({"t_mm": float(t), "dimension_set": c.dimension_set, "converged": p.converged,
                     "steps": p.steps, "gain_dbi": p.gain_dbi, "realized_gain_dbi": p.realized_gain_dbi,
                     "efficiency": p.efficiency, "efficiency_pct": 100.0 * p.efficiency,
                     "efficiency_db": _db(p.efficiency), "s11_db": s_db, "s11_phase_deg": s_ph,
                     "power_balance_error": p.power_balance_error, "flags": flags,
                     "error": p.error})
    return rows, thickness_extrema(rows, antenna=_antenna_name(cfg))


def _antenna_name(cfg: RunConfig) -> str:
    a = cfg.scene.antenna
    return "none" if a is None else type(a).__name__.replace("Params", "").lower()


def thickness_extrema(rows: list[dict], antenna: str = "") -> dict:
    """Max/min gain and efficiency over converged rows (efficiency in percent)."""
    ok = [r for r in rows if r["converged"] and math.isfinite(r["efficiency"])]
    out = {"antenna": antenna}
    if not ok:
        return out | {k: None for k in EXTREMA_COLUMNS[1:]}
    for key, col in (("gain", "gain_dbi"), ("eff", "efficiency_pct")):
        hi = max(ok, key=lambda r: r[col])
        lo = min(ok, key=lambda r: r[col])
        unit = "dbi" if key == "gain" else "pct"
        out[f"max_{key}_t_mm"] = hi["t_mm"]
        out[f"max_{key}_{unit}"] = hi[col]
        out[f"min_{key}_t_mm"] = lo["t_mm"]
        out[f"min_{key}_{unit}"] = lo[col]
    return out


def frequency_bounds(material: str, f: float, geometry: BoundGeometry | None = None) -> tuple[float, float]:
    """(electric, magnetic) model bounds in the broadband phantom material at ``f``."""
    g = geometry or BoundGeometry()
    eps_r, sigma = broadband_properties(material, f)
    return (efficiency_bound("electric", g, float(eps_r), float(sigma), f),
            efficiency_bound("magnetic", g, float(eps_r), float(sigma), f))


def sweep_frequencies(cfg: RunConfig, f_list=None, runner=run_point, workers: int | None = None,
                      templates: dict[float, RunConfig] | None = None,
                      geometry: BoundGeometry | None = None, threshold_db: float = -10.0) -> list[dict]:
    """One run per frequency with the phantom's broadband properties there.

    ``templates`` maps a frequency to a pre-tuned configuration; otherwise
    ``cfg`` is re-centred on each frequency. Rows with |S11| at or above
    ``threshold_db`` are flagged ``untuned``.
    """
    f_list = [float(f) for f in (cfg.sweep.frequencies if f_list is None else f_list)]
    templates = templates or {}
    cfgs = []
    for f in f_list:
        base = templates.get(f, cfg)
        scene = replace(base.scene, phantom_variant="broadband")
        cfgs.append(replace(base, scene=scene).with_frequency(f))
    points = _map(runner, [(c, f) for c, f in zip(cfgs, f_list)], workers or cfg.sweep.workers)
    rows = []
    for f, c, p in zip(f_list, cfgs, points):
        be, bm = frequency_bounds(c.scene.phantom_material, f, geometry)
        s_db, _ = _s11_fields(p.s11)
        flags = list(p.flags)
        if not p.converged and "failed" not in flags:
            flags.append("not_converged")
        if not s_db < threshold_db:
            flags.append("untuned")
        if math.isfinite(p.efficiency) and p.efficiency > max(be, bm):
            flags.append("above_bound")
        rows.append({"f_hz": f, "f_MHz": f / 1e6, "converged": p.converged, "steps": p.steps,
                     "efficiency": p.efficiency, "efficiency_db": _db(p.efficiency), "s11_db": s_db,
                     "bound_electric": be, "bound_magnetic": bm, "flags": flags, "error": p.error})
    return rows
