"""Spherical-mode radiation-efficiency bound for an insulated source in a lossy sphere.

The source is modelled as the lowest-order spherical mode (TM_1 for an
electric dipole, TE_1 for a magnetic one) launched at the surface of a
lossless insulating sphere of radius ``Rc + T``. The mode propagates through
the homogeneous lossy phantom out to ``Rp``, where it partially reflects and
partially escapes into air. The bound is the escaping power divided by the
power launched. This is a model bound: orderings and trends are meaningful,
absolute values are not those of optimal-current bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C0, epsilon_0, mu_0

from .special import spherical_hankel

ANGULAR = 8.0 * math.pi / 3.0  # integral of sin^2 over the sphere


@dataclass(frozen=True)
class BoundGeometry:
    """Source length ``L`` (not used by the single-mode model), capsule radius
    ``Rc``, insulation thickness ``T`` and phantom radius ``Rp``; all in mm."""

    L: float = 20.0
    Rc: float = 6.0
    T: float = 0.2
    Rp: float = 50.0

    def __post_init__(self):
        if min(self.L, self.Rc, self.T, self.Rp) <= 0:
            raise ValueError("bound geometry dimensions must be positive")
        if self.Rc + self.T >= self.Rp:
            raise ValueError("source region must fit inside the phantom")

    @property
    def source_radius(self) -> float:
        return (self.Rc + self.T) * 1e-3


@dataclass(frozen=True)
class ModeSolution:
    """Radial field u(r) = r [h1(k r) + refl * h2(k r)] inside the phantom."""

    kind: str
    f: float
    k: complex
    eps: complex  # absolute complex permittivity (F/m), e^{-iwt} convention
    refl: complex
    a: float
    rp: float

    def u(self, r):
        return np.array([self._u(float(x))[0] for x in np.atleast_1d(r)])

    def _u(self, r: float):
        z = self.k * r
        h1 = spherical_hankel(1, z, kind=1)
        h2 = spherical_hankel(1, z, kind=2)
        f = h1[1] + self.refl * h2[1]
        df = (h1[0] - 2.0 * h1[1] / z) + self.refl * (h2[0] - 2.0 * h2[1] / z)
        return r * f, f + z * df

    def flux(self, r: float) -> float:
        """Outward power through the sphere of radius r (arbitrary amplitude)."""
        u, du = self._u(r)
        w = 2.0 * math.pi * self.f
        if self.kind == "electric":
            return 0.5 * ANGULAR * (du * np.conj(u) / (1j * w * self.eps)).real
        return 0.5 * ANGULAR * (1j * u * np.conj(du) / (w * mu_0)).real

    def loss_density(self, r: float) -> float:
        """Power dissipated per unit radius at r."""
        u, du = self._u(r)
        w = 2.0 * math.pi * self.f
        sigma = w * self.eps.imag
        if self.kind == "electric":
            e2 = (abs(du) ** 2 + 2.0 * abs(u) ** 2 / r**2) / abs(w * self.eps) ** 2
        else:
            e2 = abs(u) ** 2
        return 0.5 * sigma * ANGULAR * e2


def solve_mode(kind: str, g: BoundGeometry, eps_r: float, sigma: float, f: float) -> ModeSolution:
    if kind not in ("electric", "magnetic"):
        raise ValueError("source kind must be 'electric' or 'magnetic'")
    w = 2.0 * math.pi * f
    eps = complex(eps_r * epsilon_0, sigma / w)
    k1 = w * np.sqrt(mu_0 * eps)
    k0 = w / C0
    rp = g.Rp * 1e-3
    # air side: outgoing h1(k0 r); match u and u'/eps (TM) or u' (TE) at Rp
    z0 = k0 * rp
    h0 = spherical_hankel(1, z0, kind=1)
    u0 = rp * h0[1]
    du0 = h0[1] + z0 * (h0[0] - 2.0 * h0[1] / z0)
    z1 = k1 * rp
    ha = spherical_hankel(1, z1, kind=1)
    hb = spherical_hankel(1, z1, kind=2)
    ua, dua = rp * ha[1], ha[1] + z1 * (ha[0] - 2.0 * ha[1] / z1)
    ub, dub = rp * hb[1], hb[1] + z1 * (hb[0] - 2.0 * hb[1] / z1)
    if kind == "electric":
        admit_air = du0 / (epsilon_0 * u0)
        refl = -(dua / eps - admit_air * ua) / (dub / eps - admit_air * ub)
    else:
        admit_air = du0 / u0
        refl = -(dua - admit_air * ua) / (dub - admit_air * ub)
    return ModeSolution(kind=kind, f=f, k=complex(k1), eps=eps, refl=complex(refl),
                        a=g.source_radius, rp=rp)


def efficiency_bound(kind: str, g: BoundGeometry, eps_r: float, sigma: float, f: float) -> float:
    """Escaping-to-launched power ratio of the lowest spherical mode, in (0, 1]."""
    sol = solve_mode(kind, g, eps_r, sigma, f)
    p_in = sol.flux(sol.a)
    p_out = sol.flux(sol.rp)
    if sigma == 0:
        return 1.0 if p_in > 0 else float("nan")
    return float(min(max(p_out / p_in, 0.0), 1.0))
