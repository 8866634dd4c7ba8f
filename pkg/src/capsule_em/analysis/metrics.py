"""Sensing metrics from S11 sweeps: phase, matched band, centre frequency."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..materials import TISSUES

PASSIVITY_TOL = 1e-3


class MetricError(ValueError):
    """A metric is undefined for the given data."""


class RangeError(MetricError):
    """Requested frequency lies outside the sweep."""


def wrap_deg(x):
    """Wrap angles (degrees) to (-180, 180]."""
    y = np.mod(np.asarray(x, dtype=float) + 180.0, 360.0) - 180.0
    y = np.where(y == -180.0, 180.0, y)
    return float(y) if np.ndim(y) == 0 else y


def phase_difference(a: float, b: float) -> float:
    """Minimal angular distance between two phases, in [0, 180]."""
    d = abs(float(np.mod(a - b, 360.0)))
    return min(d, 360.0 - d)


@dataclass
class FrequencySweep:
    antenna: str
    tissue: str
    t: float  # mm
    f: np.ndarray  # Hz, strictly ascending
    s11: np.ndarray  # complex

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        self.s11 = np.asarray(self.s11, dtype=complex)
        if self.f.shape != self.s11.shape or self.f.ndim != 1:
            raise ValueError("f and s11 must be 1D arrays of equal length")
        if self.f.size < 2 or np.any(np.diff(self.f) <= 0):
            raise ValueError("frequencies must be strictly ascending")

    @property
    def mag_db(self) -> np.ndarray:
        return 20.0 * np.log10(np.maximum(np.abs(self.s11), 1e-300))

    @property
    def phase_deg(self) -> np.ndarray:
        return np.degrees(np.angle(self.s11))

    def is_passive(self, tol: float = PASSIVITY_TOL) -> bool:
        return bool(np.all(np.abs(self.s11) <= 1.0 + tol))


def phase_at(sweep: FrequencySweep, f: float) -> float:
    """S11 phase (degrees) at ``f`` from linear interpolation of the unwrapped phase."""
    if not sweep.f[0] <= f <= sweep.f[-1]:
        raise RangeError(f"{f:g} Hz outside sweep range [{sweep.f[0]:g}, {sweep.f[-1]:g}]")
    ph = np.unwrap(np.angle(sweep.s11))
    return wrap_deg(math.degrees(float(np.interp(f, sweep.f, ph))))


def _crossing(f0, f1, y0, y1, level):
    return f0 + (level - y0) * (f1 - f0) / (y1 - y0)


@dataclass
class Band:
    lower: float  # Hz
    upper: float


def matched_bands(sweep: FrequencySweep, threshold_db: float = -10.0) -> list[Band]:
    """All intervals with |S11| below ``threshold_db``; edges linear in dB between samples."""
    y = sweep.mag_db
    f = sweep.f
    below = y < threshold_db
    bands = []
    i = 0
    n = len(f)
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        lo = f[0] if i == 0 else _crossing(f[i - 1], f[i], y[i - 1], y[i], threshold_db)
        hi = f[-1] if j == n - 1 else _crossing(f[j], f[j + 1], y[j], y[j + 1], threshold_db)
        bands.append(Band(float(lo), float(hi)))
        i = j + 1
    return bands


@dataclass
class MatchedInterval:
    fi2: float | None  # Hz, lower edge
    fi1: float | None  # Hz, upper edge
    per_tissue: dict[str, Band | None] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return self.fi1 is None

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.fi1 - self.fi2


def matched_interval(sweeps: dict[str, FrequencySweep], threshold_db: float = -10.0,
                     fc: dict[str, float] | None = None) -> MatchedInterval:
    """Frequency interval matched in every tissue simultaneously.

    With several disjoint bands in one tissue the band containing that
    tissue's centre frequency is used and a ``multiband`` flag is set.
    """
    grids = [s.f for s in sweeps.values()]
    if any(g.shape != grids[0].shape or np.any(g != grids[0]) for g in grids[1:]):
        raise MetricError("sweeps do not share a frequency grid")
    per, flags = {}, []
    for name, sw in sweeps.items():
        bands = matched_bands(sw, threshold_db)
        if not bands:
            per[name] = None
            continue
        if len(bands) > 1:
            flags.append(f"multiband:{name}")
            try:
                f_c = fc[name] if fc and name in fc else center_frequency(sw, threshold_db=threshold_db)
            except MetricError:
                f_c = float(sw.f[np.argmin(sw.mag_db)])
            inside = [b for b in bands if b.lower <= f_c <= b.upper]
            per[name] = inside[0] if inside else min(bands, key=lambda b: min(abs(b.lower - f_c), abs(b.upper - f_c)))
        else:
            per[name] = bands[0]
    if any(b is None for b in per.values()):
        return MatchedInterval(None, None, per, flags + ["unmatched"])
    fi2 = max(b.lower for b in per.values())
    fi1 = min(b.upper for b in per.values())
    if fi2 > fi1:
        return MatchedInterval(None, None, per, flags + ["disjoint"])
    return MatchedInterval(fi2, fi1, per, flags)


def center_frequency(sweep: FrequencySweep, method: str = "argmin", threshold_db: float = -10.0) -> float:
    """Resonance frequency (Hz) of the matched dip.

    ``argmin``: parabolic interpolation of |S11| in dB through the three
    samples around the discrete minimum. ``midband``: midpoint of the
    matched band containing the minimum.
    """
    y = sweep.mag_db
    i = int(np.argmin(y))
    if y[i] >= threshold_db:
        raise MetricError(f"no dip below {threshold_db:g} dB in {sweep.tissue} sweep")
    if method == "midband":
        for b in matched_bands(sweep, threshold_db):
            if b.lower <= sweep.f[i] <= b.upper:
                return 0.5 * (b.lower + b.upper)
    if method not in ("argmin", "midband"):
        raise ValueError(f"unknown centre-frequency method {method!r}")
    if i == 0 or i == len(y) - 1:
        return float(sweep.f[i])
    f0, f1, f2 = sweep.f[i - 1:i + 2]
    y0, y1, y2 = y[i - 1:i + 2]
    # vertex of the parabola through three (possibly non-uniform) points
    num = (f1 - f0) ** 2 * (y1 - y2) - (f1 - f2) ** 2 * (y1 - y0)
    den = (f1 - f0) * (y1 - y2) - (f1 - f2) * (y1 - y0)
    if den == 0:
        return float(f1)
    return float(f1 - 0.5 * num / den)


@dataclass
class SensingMetrics:
    """Per-antenna metrics across the three tissues; frequencies in MHz."""

    phase_434: dict[str, float]
    phase_diff: dict[str, float]
    fi1: float | None
    fi2: float | None
    delta_fi: float | None
    fc: dict[str, float | None]
    fc1: float | None
    fc2: float | None
    fc_diff: float | None
    gain_dbi: dict[str, float] = field(default_factory=dict)
    efficiency: dict[str, float] = field(default_factory=dict)
    fc_method: str = "argmin"
    fc_alternative: dict[str, float | None] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "phase_434": self.phase_434, "phase_diff": self.phase_diff,
            "fi1": self.fi1, "fi2": self.fi2, "delta_fi": self.delta_fi,
            "delta_fi_empty": self.delta_fi is None,
            "fc": self.fc, "fc1": self.fc1, "fc2": self.fc2, "fc_diff": self.fc_diff,
            "fc_method": self.fc_method, "fc_alternative": self.fc_alternative,
            "gain_dbi": self.gain_dbi, "efficiency": self.efficiency, "flags": self.flags,
        }


def derive_metrics(phases: dict[str, float], fi1: float | None, fi2: float | None,
                   fc: dict[str, float | None] | None = None, fc1: float | None = None,
                   fc2: float | None = None, order=TISSUES) -> SensingMetrics:
    """Derived cells from primitive cells (phases in degrees, frequencies in MHz).

    Either per-tissue ``fc`` values or the extremes ``fc1``/``fc2`` may be given.
    """
    diffs = {f"{a}-{b}": phase_difference(phases[a], phases[b]) for a, b in zip(order, order[1:])}
    fc = dict(fc or {})
    known = [v for v in fc.values() if v is not None]
    if known:
        fc1, fc2 = max(known), min(known)
    fc_diff = None if fc1 is None or fc2 is None else fc1 - fc2
    if fi1 is None or fi2 is None or fi2 > fi1:
        fi1 = fi2 = dfi = None
    else:
        dfi = fi1 - fi2
    return SensingMetrics(dict(phases), diffs, fi1, fi2, dfi, fc, fc1, fc2, fc_diff)


def compute_metrics(sweeps: dict[str, FrequencySweep], f_phase: float = 434e6,
                    threshold_db: float = -10.0, fc_method: str = "argmin",
                    gain_dbi: dict | None = None, efficiency: dict | None = None,
                    order=TISSUES) -> SensingMetrics:
    """Full metric set from one sweep per tissue."""
    names = [t for t in order if t in sweeps] or list(sweeps)
    flags = []
    phases = {t: phase_at(sweeps[t], f_phase) for t in names}
    fc, fc_alt = {}, {}
    alt = "midband" if fc_method == "argmin" else "argmin"
    for t in names:
        for store, meth in ((fc, fc_method), (fc_alt, alt)):
            try:
                store[t] = center_frequency(sweeps[t], meth, threshold_db) / 1e6
            except MetricError:
                store[t] = None
                if meth == fc_method:
                    flags.append(f"fc_undefined:{t}")
        if not sweeps[t].is_passive():
            flags.append(f"non_passive:{t}")
    mi = matched_interval({t: sweeps[t] for t in names}, threshold_db,
                          {t: v * 1e6 for t, v in fc.items() if v is not None})
    flags += mi.flags
    fi1 = None if mi.empty else mi.fi1 / 1e6
    fi2 = None if mi.empty else mi.fi2 / 1e6
    m = derive_metrics(phases, fi1, fi2, fc=fc, order=names)
    m.fc_method = fc_method
    m.fc_alternative = fc_alt
    m.gain_dbi = dict(gain_dbi or {})
    m.efficiency = dict(efficiency or {})
    m.flags = flags
    return m
