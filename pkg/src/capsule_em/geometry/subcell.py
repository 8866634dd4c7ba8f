"""Anisotropic subcell averaging across curved, radially layered interfaces.

Each E edge near an interface sees a short stack of layers along the local
normal. The stack fraction f_k of every layer inside the edge's dual cell
gives a parallel (arithmetic) and a series (harmonic) complex
permittivity; the edge mixes them with weight P = (edge . normal)^2:

    eps_eff = (1 - P) * sum(f_k eps_k) + P / sum(f_k / eps_k)

Complex permittivities are evaluated at one frequency and converted back
to a frequency-flat (eps_r, sigma) pair for the time-domain update.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import epsilon_0


@dataclass(frozen=True)
class RadialLayers:
    """Concentric layers around a point (``half_length = 0``) or an axial segment.

    ``radii`` are the ascending interface radii (m); ``eps`` holds one
    complex relative permittivity per layer, innermost first, so
    ``len(eps) == len(radii) + 1``.
    """

    center: tuple[float, float, float]
    radii: tuple[float, ...]
    eps: tuple[complex, ...]
    half_length: float = 0.0  # segment along z; 0 gives spheres

    def __post_init__(self):
        if len(self.eps) != len(self.radii) + 1:
            raise ValueError("need one permittivity per layer")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("interface radii must ascend")

    def distance(self, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Radial coordinate and unit normal for points ``p`` of shape (..., 3)."""
        q = p - np.asarray(self.center)
        if self.half_length > 0:
            q = q.copy()
            q[..., 2] -= np.clip(q[..., 2], -self.half_length, self.half_length)
        r = np.linalg.norm(q, axis=-1)
        n = q / np.maximum(r, 1e-30)[..., None]
        return r, n

    def layer_fractions(self, r: np.ndarray, h: np.ndarray) -> np.ndarray:
        """Fraction of each layer inside [r - h, r + h]; shape (..., n_layers)."""
        edges = np.concatenate([[-np.inf], self.radii, [np.inf]])
        lo = (r - h)[..., None]
        hi = (r + h)[..., None]
        over = np.clip(np.minimum(hi, edges[1:]) - np.maximum(lo, edges[:-1]), 0.0, None)
        return over / (2.0 * h)[..., None]


def complex_eps(eps_r: float, sigma: float, f: float) -> complex:
    return complex(eps_r, -sigma / (2.0 * math.pi * f * epsilon_0))


def flat_from_complex(eps_c, f: float):
    eps_c = np.asarray(eps_c)
    return eps_c.real, -eps_c.imag * 2.0 * math.pi * f * epsilon_0


def edge_positions(shape, axis: int, origin, d: float, lo, hi) -> np.ndarray:
    """Coordinates (m) of the ``axis`` edges with indices in [lo, hi) per dimension."""
    grids = []
    for a in range(3):
        idx = np.arange(lo[a], hi[a], dtype=float)
        if a == axis:
            idx = idx + 0.5
        grids.append(origin[a] + idx * d)
    return np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1)


def layered_overrides(shape, origin, d: float, body: RadialLayers, f: float):
    """Averaged (eps_r, sigma) for every edge whose dual cell straddles an interface.

    Returns a list of (axis, flat_index, eps_r, sigma) for the
    component arrays of a grid of ``shape`` cells.
    """
    origin = np.asarray(origin, dtype=float)
    reach = max(body.radii) + d
    c = np.asarray(body.center, dtype=float)
    ext = np.array([reach, reach, reach + body.half_length])
    out = []
    eps = np.asarray(body.eps, dtype=complex)
    for axis in range(3):
        eshape = tuple(n if a == axis else n + 1 for a, n in enumerate(shape))
        lo = np.maximum(np.floor((c - ext - origin) / d).astype(int) - 1, 0)
        hi = np.minimum(np.ceil((c + ext - origin) / d).astype(int) + 2, eshape)
        if np.any(hi <= lo):
            out.append((axis, np.zeros(0, dtype=np.int64), np.zeros(0), np.zeros(0)))
            continue
        p = edge_positions(shape, axis, origin, d, lo, hi)
        r, n = body.distance(p)
        h = 0.5 * d * np.abs(n).sum(axis=-1)
        frac = body.layer_fractions(r, h)
        mixed = np.count_nonzero(frac > 1e-12, axis=-1) > 1
        sel = np.nonzero(mixed)
        fk = frac[sel]
        mean = fk @ eps
        harm = 1.0 / (fk @ (1.0 / eps))
        P = n[sel][:, axis] ** 2
        eff = (1.0 - P) * mean + P * harm
        e_r, sig = flat_from_complex(eff, f)
        local = np.stack(sel, axis=-1) + lo
        flat = np.ravel_multi_index(tuple(local.T), eshape).astype(np.int64)
        out.append((axis, flat, e_r, sig))
    return out


def apply_overrides(medium, overrides) -> int:
    """Write overrides into an :class:`EdgeMedium`; returns the number of edges touched."""
    count = 0
    for axis, flat, e_r, sig in overrides:
        if flat.size:
            medium.override(axis, flat, e_r, sig)
            count += flat.size
    return count
