"""Nearest-reference tissue classification from the 434 MHz S11 phase."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .metrics import phase_difference, wrap_deg


class CalibrationWarning(UserWarning):
    """Reference differences are too spread for a single constant offset."""


@dataclass(frozen=True)
class ClassifierModel:
    references: dict[str, float]  # degrees
    threshold: float = 10.0  # degrees
    offset: float = 0.0  # degrees, subtracted from measured phases

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError("threshold must be > 0")
        if len(self.references) < 1:
            raise ValueError("need at least one reference phase")
        names = list(self.references)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if phase_difference(self.references[a], self.references[b]) == 0:
                    raise ValueError(f"references {a} and {b} coincide")

    @classmethod
    def from_json(cls, path) -> "ClassifierModel":
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        return cls({k: float(v) for k, v in d["references"].items()},
                   float(d.get("threshold", 10.0)), float(d.get("offset", 0.0)))

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"references": self.references, "threshold": self.threshold,
                       "offset": self.offset}, fh, indent=2, sort_keys=True)
            fh.write("\n")


@dataclass
class Classification:
    label: str  # tissue name, "unclassified" or "ambiguous"
    distances: dict[str, float]
    candidates: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.label not in ("unclassified", "ambiguous")


def classify_tissue(phase: float, model: ClassifierModel, tie_tol: float = 1e-9) -> Classification:
    """Label of the nearest reference phase, if within the model threshold."""
    p = wrap_deg(phase - model.offset)
    dist = {k: phase_difference(p, v) for k, v in model.references.items()}
    best = min(dist.values())
    near = sorted(k for k, v in dist.items() if v - best <= tie_tol)
    if best > model.threshold:
        return Classification("unclassified", dist, near)
    if len(near) > 1:
        return Classification("ambiguous", dist, near)
    return Classification(near[0], dist, near)


def calibrate_offset(measured: dict[str, float] | list[float], simulated: dict[str, float] | list[float],
                     max_spread: float = 30.0) -> float:
    """Circular mean of the wrapped differences measured - simulated (degrees).

    A spread (largest distance of any difference from the mean) above
    ``max_spread`` issues :class:`CalibrationWarning`.
    """
    if isinstance(measured, dict):
        keys = list(simulated)
        m = [measured[k] for k in keys]
        s = [simulated[k] for k in keys]
    else:
        m, s = list(measured), list(simulated)
    if len(m) != len(s) or not m:
        raise ValueError("measured and simulated references must match in length")
    diffs = np.radians(wrap_deg(np.subtract(m, s)))
    z = np.mean(np.exp(1j * diffs))
    if abs(z) < 1e-12:
        mean = 0.0
    else:
        mean = wrap_deg(math.degrees(math.atan2(z.imag, z.real)))
    if abs(mean) < 1e-9:
        mean = 0.0
    spread = max(phase_difference(math.degrees(d), mean) for d in diffs)
    if spread > max_spread:
        warnings.warn(f"calibration unreliable: differences spread {spread:.1f} deg around the mean",
                      CalibrationWarning, stacklevel=2)
    return float(mean)
