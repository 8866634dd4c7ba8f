"""Closed-form reflection coefficient of a series RLC load."""
from __future__ import annotations

import numpy as np


def series_rlc_impedance(R: float, L: float, C: float, f):
    w = 2.0 * np.pi * np.asarray(f, dtype=float)
    z = R + 1j * w * L
    if np.isfinite(C):
        z = z + 1.0 / (1j * w * C)
    return z


def circuit_s11(R: float, L: float, C: float, Z0: float, f):
    """S11 = (Z - Z0) / (Z + Z0) with Z = R + jwL + 1/(jwC).

    ``C = inf`` drops the capacitor (short), ``L = 0`` drops the inductor.
    """
    if R < 0 or L < 0 or C <= 0 or Z0 <= 0:
        raise ValueError("circuit elements must be non-negative (C, Z0 positive)")
    z = series_rlc_impedance(R, L, C, f)
    return (z - Z0) / (z + Z0)


def resonant_capacitance(L: float, f0: float) -> float:
    return 1.0 / ((2.0 * np.pi * f0) ** 2 * L)
