"""Mie series for a homogeneous lossy sphere under plane-wave illumination."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0, epsilon_0, mu_0

from .special import log_derivative, spherical_jn, spherical_yn


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class MieResult:
    extinction: float  # m^2
    scattering: float
    absorption: float
    n_terms: int
    size_parameter: float

    def absorbed_power(self, e0: float = 1.0) -> float:
        """Absorbed power (W) for an incident plane wave of peak amplitude ``e0`` (V/m)."""
        return self.absorption * e0**2 / (2.0 * math.sqrt(mu_0 / epsilon_0))


def wiscombe_terms(x: float) -> int:
    return int(round(x + 4.0 * x ** (1.0 / 3.0) + 2.0))


def mie_coefficients(m: complex, x: float, n_terms: int):
    """Scattering coefficients a_n, b_n for n = 1..n_terms (Bohren-Huffman form)."""
    mx = m * x
    d = log_derivative(max(n_terms, int(abs(mx))) + 16, mx)[: n_terms + 1]
    psi = x * spherical_jn(n_terms, x).real
    chi = -x * spherical_yn(n_terms, x).real
    xi = psi - 1j * chi
    n = np.arange(1, n_terms + 1)
    ta = d[1:] / m + n / x
    tb = d[1:] * m + n / x
    a = (ta * psi[1:] - psi[:-1]) / (ta * xi[1:] - xi[:-1])
    b = (tb * psi[1:] - psi[:-1]) / (tb * xi[1:] - xi[:-1])
    return a, b


def _cross_sections(m, x, n_terms, radius):
    a, b = mie_coefficients(m, x, n_terms)
    n = np.arange(1, n_terms + 1)
    q_ext = 2.0 / x**2 * np.sum((2 * n + 1) * (a + b).real)
    q_sca = 2.0 / x**2 * np.sum((2 * n + 1) * (abs(a) ** 2 + abs(b) ** 2))
    area = math.pi * radius**2
    return q_ext * area, q_sca * area


def mie_lossy_sphere(radius: float, eps_r: float, sigma: float, f: float,
                     n_terms: int | None = None, rtol: float = 1e-6) -> MieResult:
    """Cross sections (m^2) of a sphere of radius ``radius`` (m) in vacuum.

    The series is truncated by Wiscombe's rule and re-evaluated with five
    more terms; disagreement beyond ``rtol`` raises ConvergenceError.
    """
    if radius <= 0 or f <= 0:
        raise ValueError("radius and frequency must be positive")
    w = 2.0 * math.pi * f
    m = np.sqrt(complex(eps_r, sigma / (w * epsilon_0)))
    x = w / C0 * radius
    n_terms = n_terms or wiscombe_terms(x)
    ext, sca = _cross_sections(m, x, n_terms, radius)
    ext2, sca2 = _cross_sections(m, x, n_terms + 5, radius)
    scale = max(abs(ext2), 1e-300)
    residual = max(abs(ext2 - ext), abs(sca2 - sca)) / scale
    if residual > rtol:
        raise ConvergenceError(f"Mie series not converged with {n_terms} terms", residual)
    return MieResult(extinction=ext, scattering=sca, absorption=max(ext - sca, 0.0),
                     n_terms=n_terms, size_parameter=x)


def rayleigh_absorption(radius: float, eps_r: float, sigma: float, f: float) -> float:
    """Quasi-static absorption cross section (m^2) of a small sphere."""
    w = 2.0 * math.pi * f
    eps = complex(eps_r, sigma / (w * epsilon_0))
    k = w / C0
    return 4.0 * math.pi * k * radius**3 * ((eps - 1.0) / (eps + 2.0)).imag
