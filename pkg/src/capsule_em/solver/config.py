from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Invalid solver configuration."""


@dataclass(frozen=True)
class GaussianPulse:
    """Gaussian-modulated sinusoid.

    ``bandwidth`` is the full width (Hz) between the points where the
    spectrum has fallen 20 dB below its peak.
    """

    center: float = 434e6
    bandwidth: float = 400e6
    amplitude: float = 1.0
    delay_widths: float = 3.5

    def __post_init__(self):
        if self.center <= 0 or self.bandwidth <= 0:
            raise ConfigError("excitation center and bandwidth must be positive")
        if self.bandwidth >= 2 * self.center:
            raise ConfigError("excitation bandwidth must be below twice the center frequency")

    @property
    def tau(self) -> float:
        return math.sqrt(math.log(10.0)) / (math.pi * 0.5 * self.bandwidth)

    @property
    def t0(self) -> float:
        return self.delay_widths * self.tau

    @property
    def duration(self) -> float:
        return 2.0 * self.t0

    @property
    def band(self) -> tuple[float, float]:
        return self.center - 0.5 * self.bandwidth, self.center + 0.5 * self.bandwidth

    def __call__(self, t):
        x = (np.asarray(t, dtype=float) - self.t0) / self.tau
        return self.amplitude * np.exp(-x * x) * np.sin(2.0 * math.pi * self.center * (t - self.t0))

    def in_band(self, f) -> bool:
        lo, hi = self.band
        f = np.asarray(f, dtype=float)
        return bool(np.all((f >= lo * (1 - 1e-12)) & (f <= hi * (1 + 1e-12))))


@dataclass(frozen=True)
class CPMLProfile:
    order: float = 3.0
    sigma_factor: float = 0.8  # fraction-free scale on the optimal sigma_max
    alpha_max: float = 0.05
    kappa_max: float = 1.0


@dataclass(frozen=True)
class SimulationConfig:
    courant_factor: float = 0.99
    max_steps: int = 40000
    decay_threshold: float = -60.0
    excitation: GaussianPulse = field(default_factory=GaussianPulse)
    cpml_layers: int = 8
    cpml: CPMLProfile = field(default_factory=CPMLProfile)
    precision: str = "double"
    dft_samples_per_period: int = 40

    def __post_init__(self):
        if not 0 < self.courant_factor < 1:
            raise ConfigError("courant_factor must lie in (0, 1)")
        if self.decay_threshold > -40:
            raise ConfigError("decay_threshold must be <= -40 dB")
        if self.cpml_layers < 6:
            raise ConfigError("cpml_layers must be >= 6")
        if self.max_steps < 1:
            raise ConfigError("max_steps must be positive")
        if self.precision not in ("double", "single"):
            raise ConfigError("precision must be 'double' or 'single'")

    @property
    def dtype(self):
        return np.float64 if self.precision == "double" else np.float32
