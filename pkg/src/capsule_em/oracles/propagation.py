"""Plane-wave propagation constants in a lossy dielectric."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.constants import epsilon_0, mu_0


@dataclass(frozen=True)
class PropagationConstants:
    f: float
    alpha: float  # Np/m
    beta: float  # rad/m

    @property
    def skin_depth(self) -> float:
        return math.inf if self.alpha == 0 else 1.0 / self.alpha

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi / self.beta


def plane_wave_attenuation(eps_r: float, sigma: float, f: float) -> PropagationConstants:
    if f <= 0:
        raise ValueError("frequency must be positive")
    w = 2.0 * math.pi * f
    eps = eps_r * epsilon_0
    loss = math.hypot(1.0, sigma / (w * eps))
    root = w * math.sqrt(mu_0 * eps / 2.0)
    return PropagationConstants(f=f, alpha=root * math.sqrt(loss - 1.0),
                                beta=root * math.sqrt(loss + 1.0))
