"""Tissue and dielectric properties, and single-pole Debye models for the solver.

Tissue entries hold the 434 MHz values of the gastrointestinal tissues
(stomach, small intestine, large intestine), the measured tissue-mimicking
liquids, the time-averaged GI material and the capsule/substrate dielectrics.
Broadband behaviour comes from Gabriel four-pole Cole-Cole parameter sets,
which are only used to anchor Debye fits for wideband runs.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources

import numpy as np
from scipy.constants import epsilon_0

TWO_PI = 2.0 * math.pi
REF_FREQ = 434e6


class MaterialError(KeyError):
    """Unknown material name or variant."""


class FitError(ValueError):
    """No passive single-pole Debye model matches the requested points."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class Material:
    """Dielectric described at a single reference frequency.

    Exactly one of ``sigma`` and ``tan_delta`` is authoritative. Low-loss
    dielectrics carry ``tan_delta`` and their conductivity is derived at
    whatever frequency the caller asks for.
    """

    name: str
    eps_r: float
    sigma: float | None = 0.0
    ref_freq: float = REF_FREQ
    tan_delta: float | None = None
    variant: str = "nominal"

    def __post_init__(self):
        if self.eps_r < 1.0:
            raise ValueError(f"{self.name}: eps_r must be >= 1, got {self.eps_r}")
        if (self.sigma is None) == (self.tan_delta is None):
            raise ValueError(f"{self.name}: exactly one of sigma / tan_delta must be set")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError(f"{self.name}: sigma must be >= 0")
        if self.tan_delta is not None and self.tan_delta < 0:
            raise ValueError(f"{self.name}: tan_delta must be >= 0")
        if self.ref_freq <= 0:
            raise ValueError(f"{self.name}: ref_freq must be positive")

    def conductivity(self, f: float | None = None) -> float:
        """Conductivity in S/m; ``f`` only matters for tan-delta materials."""
        if self.sigma is not None:
            return self.sigma
        f = self.ref_freq if f is None else f
        return TWO_PI * f * epsilon_0 * self.eps_r * self.tan_delta

    def complex_permittivity(self, f: float | None = None) -> complex:
        f = self.ref_freq if f is None else f
        return complex(self.eps_r, -self.conductivity(f) / (TWO_PI * f * epsilon_0))

    def to_debye(self, f_center: float | None = None) -> "DebyeFit":
        """Frequency-flat time-domain model, conductivity taken at ``f_center``."""
        return DebyeFit(eps_inf=self.eps_r, delta_eps=0.0, tau=1e-12,
                        sigma_s=self.conductivity(f_center))


@dataclass(frozen=True)
class DebyeFit:
    """eps(w) = eps_inf + delta_eps / (1 + j w tau) + sigma_s / (j w eps0)."""

    eps_inf: float
    delta_eps: float
    tau: float
    sigma_s: float

    def __post_init__(self):
        if self.delta_eps < 0:
            raise ValueError("delta_eps must be >= 0")
        if self.tau <= 0:
            raise ValueError("tau must be > 0")
        if self.sigma_s < 0:
            raise ValueError("sigma_s must be >= 0")

    @property
    def is_dispersive(self) -> bool:
        return self.delta_eps > 0.0

    def complex_permittivity(self, f):
        w = TWO_PI * np.asarray(f, dtype=float)
        return (self.eps_inf + self.delta_eps / (1.0 + 1j * w * self.tau)
                + self.sigma_s / (1j * w * epsilon_0))


def evaluate(fit: DebyeFit, f):
    """Return ``(eps_r, sigma)`` of a Debye model at frequency ``f`` (Hz)."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise ValueError("frequency must be positive")
    w = TWO_PI * f_arr
    x2 = (w * fit.tau) ** 2
    eps = fit.eps_inf + fit.delta_eps / (1.0 + x2)
    sigma = fit.sigma_s + w**2 * fit.tau * fit.delta_eps * epsilon_0 / (1.0 + x2)
    if f_arr.ndim == 0:
        return float(eps), float(sigma)
    return eps, sigma


def fit_debye(p_low, p_high, rtol: float = 0.01) -> DebyeFit:
    """Fit a single Debye pole plus static conductivity through two points.

    Each point is ``(eps_r, sigma, f)``. With four parameters and four
    equations the fit is exact when it exists: the relaxation time follows
    from ``tau = eps0 * d_eps / d_sigma`` because both the permittivity drop
    and the conductivity rise share the same dispersion factor.
    """
    e1, s1, f1 = (float(v) for v in p_low)
    e2, s2, f2 = (float(v) for v in p_high)
    if not f1 < f2:
        raise ValueError("p_low must be at a lower frequency than p_high")
    for e, s in ((e1, s1), (e2, s2)):
        if e < 1 or s < 0:
            raise ValueError("fit points must satisfy eps_r >= 1 and sigma >= 0")

    d_eps = e1 - e2
    d_sig = s2 - s1
    scale_e = max(e1, e2)
    scale_s = max(s1, s2, 1e-12)
    if abs(d_eps) <= 1e-12 * scale_e and abs(d_sig) <= 1e-12 * scale_s:
        return DebyeFit(eps_inf=e1, delta_eps=0.0, tau=1e-12, sigma_s=s1)
    if d_eps <= 0 or d_sig <= 0:
        # Passive single-pole media have eps falling and sigma rising with f;
        # the flat model is the best that remains.
        flat = DebyeFit(eps_inf=0.5 * (e1 + e2), delta_eps=0.0, tau=1e-12,
                        sigma_s=0.5 * (s1 + s2))
        raise FitError("no passive single-pole fit: permittivity must decrease and "
                       "conductivity increase with frequency",
                       residual=_fit_residual(flat, (e1, s1, f1), (e2, s2, f2)))

    tau = epsilon_0 * d_eps / d_sig
    x1 = (TWO_PI * f1 * tau) ** 2
    x2 = (TWO_PI * f2 * tau) ** 2
    delta = d_eps / (1.0 / (1.0 + x1) - 1.0 / (1.0 + x2))
    eps_inf = e1 - delta / (1.0 + x1)
    sigma_s = s1 - (TWO_PI * f1) ** 2 * tau * delta * epsilon_0 / (1.0 + x1)
    if eps_inf < 1.0 or sigma_s < 0.0:
        raise FitError(f"fit is non-physical (eps_inf={eps_inf:.4g}, sigma_s={sigma_s:.4g})")
    fit = DebyeFit(eps_inf=eps_inf, delta_eps=delta, tau=tau, sigma_s=sigma_s)
    residual = _fit_residual(fit, (e1, s1, f1), (e2, s2, f2))
    if residual > rtol:
        raise FitError(f"fit residual {residual:.3g} exceeds {rtol}", residual=residual)
    return fit


def _fit_residual(fit, *points):
    worst = 0.0
    for e, s, f in points:
        ef, sf = evaluate(fit, f)
        worst = max(worst, abs(ef - e) / e)
        if s > 0:
            worst = max(worst, abs(sf - s) / s)
    return worst


# ---------------------------------------------------------------------------
# Library
# ---------------------------------------------------------------------------

TISSUES = ("ST", "SI", "LI")


@lru_cache(maxsize=None)
def _library_rows() -> tuple[Material, ...]:
    text = resources.files("capsule_em.data").joinpath("materials.csv").read_text()
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = []
    for rec in csv.DictReader(lines):
        sigma = float(rec["sigma"]) if rec["sigma"] else None
        tan_d = float(rec["tan_delta"]) if rec["tan_delta"] else None
        rows.append(Material(name=rec["name"], eps_r=float(rec["eps_r"]), sigma=sigma,
                             ref_freq=float(rec["ref_freq_hz"]), tan_delta=tan_d,
                             variant=rec["variant"]))
    return tuple(rows)


def material_names() -> list[str]:
    return sorted({m.name for m in _library_rows()})


def tissue_library(name: str, variant: str = "nominal") -> Material:
    """Look up a library material by name (``ST``, ``SI``, ``LI``, ``GI_avg``,
    ``PLA``, ``substrate``, ``air``) and variant (``nominal`` or ``measured``)."""
    for m in _library_rows():
        if m.name == name and m.variant == variant:
            return m
    known = ", ".join(material_names())
    raise MaterialError(f"unknown material {name!r} (variant {variant!r}); known: {known}")


def with_properties(material: Material, eps_r: float, sigma: float) -> Material:
    return replace(material, eps_r=eps_r, sigma=sigma, tan_delta=None)


# ---------------------------------------------------------------------------
# Broadband tissue dispersion (Gabriel four-pole Cole-Cole)
# ---------------------------------------------------------------------------

# (eps_inf, [(delta_eps, tau_s, alpha) x4], sigma_ionic)
GABRIEL_PARAMS = {
    "ST": (4.0, ((60.0, 7.958e-12, 0.1), (2000.0, 79.577e-9, 0.1),
                 (1.0e5, 159.155e-6, 0.2), (4.0e7, 15.915e-3, 0.0)), 0.5),
    "SI": (4.0, ((50.0, 7.958e-12, 0.1), (1.0e4, 159.155e-9, 0.1),
                 (5.0e5, 159.155e-6, 0.2), (4.0e7, 15.915e-3, 0.0)), 0.5),
    "LI": (4.0, ((50.0, 7.958e-12, 0.1), (3000.0, 159.155e-9, 0.2),
                 (1.0e5, 159.155e-6, 0.2), (4.0e7, 1.592e-3, 0.0)), 0.01),
}


def cole_cole(name: str, f):
    """Complex relative permittivity of a GI tissue from its Cole-Cole model."""
    eps_inf, poles, sig = GABRIEL_PARAMS[name]
    w = TWO_PI * np.asarray(f, dtype=float)
    eps = eps_inf + sig / (1j * w * epsilon_0)
    for d, tau, alpha in poles:
        eps = eps + d / (1.0 + (1j * w * tau) ** (1.0 - alpha))
    return eps


@lru_cache(maxsize=None)
def gi_transit_weights() -> tuple[float, float, float]:
    """Residence-time weights of ST/SI/LI that reproduce GI_avg at 434 MHz.

    Solves the 3x3 system (weights sum to one, weighted permittivity and
    conductivity equal the averaged GI material) on the Cole-Cole values.
    """
    target = tissue_library("GI_avg")
    f = target.ref_freq
    w = TWO_PI * f
    vals = [cole_cole(t, f) for t in TISSUES]
    a = np.array([[1.0, 1.0, 1.0],
                  [v.real for v in vals],
                  [-v.imag * w * epsilon_0 for v in vals]])
    b = np.array([1.0, target.eps_r, target.sigma])
    weights = np.linalg.solve(a, b)
    if np.any(weights < 0):
        raise FitError("negative residence weight for GI average")
    return tuple(float(x) for x in weights)


def broadband_permittivity(name: str, f):
    """Complex permittivity of ST, SI, LI or GI_avg over the 300-2500 MHz band."""
    if name in GABRIEL_PARAMS:
        return cole_cole(name, f)
    if name == "GI_avg":
        return sum(wt * cole_cole(t, f) for wt, t in zip(gi_transit_weights(), TISSUES))
    raise MaterialError(f"no broadband model for {name!r}")


def broadband_properties(name: str, f):
    """``(eps_r, sigma)`` of a broadband tissue model at ``f``."""
    eps = broadband_permittivity(name, f)
    w = TWO_PI * np.asarray(f, dtype=float)
    return np.real(eps), -np.imag(eps) * w * epsilon_0


def broadband_material(name: str, f: float) -> Material:
    eps, sig = broadband_properties(name, f)
    return Material(name=name, eps_r=float(eps), sigma=float(sig), ref_freq=float(f),
                    variant="broadband")


def broadband_debye(name: str, f_low: float = 300e6, f_high: float = 2.5e9) -> DebyeFit:
    """Debye pole anchored on the Cole-Cole model at the band edges."""
    e1, s1 = broadband_properties(name, f_low)
    e2, s2 = broadband_properties(name, f_high)
    return fit_debye((float(e1), float(s1), f_low), (float(e2), float(s2), f_high))
