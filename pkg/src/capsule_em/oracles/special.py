"""Spherical Bessel and Hankel functions of complex argument.

``j_n`` is generated by Miller's downward recurrence (upward recurrence loses
all accuracy once ``n > |z|``); ``y_n`` and the Hankel functions are dominant
solutions and are generated upward from their closed-form seeds.
"""
from __future__ import annotations

import numpy as np


def _start_order(nmax: int, z: complex) -> int:
    return int(nmax + 15 + abs(z) + 4.0 * abs(z) ** (1.0 / 3.0))


def spherical_jn(nmax: int, z: complex) -> np.ndarray:
    """Return ``[j_0(z), ..., j_nmax(z)]``."""
    z = complex(z)
    if z == 0:
        out = np.zeros(nmax + 1, dtype=complex)
        out[0] = 1.0
        return out
    if abs(z) > nmax + 1 and abs(z.imag) < 1.0:
        # oscillatory regime: upward recurrence is stable while n < |z|
        return _jn_upward(nmax, z)
    nstart = _start_order(nmax, z)
    vals = np.zeros(nstart + 2, dtype=complex)
    vals[nstart + 1] = 0.0
    vals[nstart] = 1e-30
    for n in range(nstart, 0, -1):
        vals[n - 1] = (2 * n + 1) / z * vals[n] - vals[n + 1]
        if abs(vals[n - 1]) > 1e250:
            vals[n - 1:] *= 1e-250
    j0 = np.sin(z) / z
    # normalise against whichever of j0/j1 is better conditioned
    if abs(vals[0]) >= 1e-8 * abs(vals[1]):
        scale = j0 / vals[0]
    else:
        j1 = np.sin(z) / z**2 - np.cos(z) / z
        scale = j1 / vals[1]
    return vals[: nmax + 1] * scale


def _jn_upward(nmax: int, z: complex) -> np.ndarray:
    out = np.empty(nmax + 1, dtype=complex)
    out[0] = np.sin(z) / z
    if nmax >= 1:
        out[1] = np.sin(z) / z**2 - np.cos(z) / z
    for n in range(1, nmax):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out


def spherical_yn(nmax: int, z: complex) -> np.ndarray:
    """Return ``[y_0(z), ..., y_nmax(z)]`` by upward recurrence."""
    z = complex(z)
    out = np.empty(nmax + 1, dtype=complex)
    out[0] = -np.cos(z) / z
    if nmax >= 1:
        out[1] = -np.cos(z) / z**2 - np.sin(z) / z
    for n in range(1, nmax):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out


def spherical_hankel(nmax: int, z: complex, kind: int = 1) -> np.ndarray:
    """Spherical Hankel function of the first or second kind, orders 0..nmax.

    Seeded from closed forms and recurred upward, which avoids the
    cancellation in ``j_n +/- i y_n`` when ``Im z`` is large.
    """
    z = complex(z)
    s = 1j if kind == 1 else -1j
    if kind not in (1, 2):
        raise ValueError("kind must be 1 or 2")
    e = np.exp(s * z)
    out = np.empty(nmax + 1, dtype=complex)
    out[0] = -s * e / z
    if nmax >= 1:
        out[1] = -e / z * (1.0 + s / z)
    for n in range(1, nmax):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out


def derivative(values: np.ndarray, z: complex) -> np.ndarray:
    """d/dz f_n(z) from a table of any spherical Bessel family, orders 0..len-2."""
    n = np.arange(len(values))
    der = np.empty_like(values)
    der[0] = -values[1]
    der[1:] = values[:-1] - (n[1:] + 1) / z * values[1:]
    return der


def log_derivative(nmax: int, z: complex) -> np.ndarray:
    """Logarithmic derivative ``D_n(z) = psi_n'(z) / psi_n(z)`` of the
    Riccati-Bessel function, by downward recurrence."""
    z = complex(z)
    nstart = _start_order(nmax, z)
    d = np.zeros(nstart + 1, dtype=complex)
    for n in range(nstart, 0, -1):
        d[n - 1] = n / z - 1.0 / (d[n] + n / z)
    return d[: nmax + 1]
