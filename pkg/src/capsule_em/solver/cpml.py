"""Convolutional PML (kappa = 1) applied as corrections on the outer slabs."""
from __future__ import annotations

import numpy as np
from scipy.constants import epsilon_0, mu_0

from . import kernels
from .config import CPMLProfile

ETA0 = float(np.sqrt(mu_0 / epsilon_0))

# (field axis, derivative axis, source field axis, sign) for E and H updates.
_E_TERMS = [
    (1, 0, 2, -1.0), (2, 0, 1, +1.0),
    (0, 1, 2, +1.0), (2, 1, 0, -1.0),
    (0, 2, 1, -1.0), (1, 2, 0, +1.0),
]
_H_TERMS = [
    (1, 0, 2, +1.0), (2, 0, 1, -1.0),
    (0, 1, 2, -1.0), (2, 1, 0, +1.0),
    (0, 2, 1, +1.0), (1, 2, 0, -1.0),
]


def profile_coefficients(depth: np.ndarray, profile: CPMLProfile, cell_size: float, dt: float):
    """Recursive-convolution coefficients (b, c) at normalised depths in [0, 1]."""
    m = profile.order
    sigma_max = profile.sigma_factor * (m + 1) / (ETA0 * cell_size)
    sigma = sigma_max * depth**m
    alpha = profile.alpha_max * (1.0 - depth)
    b = np.exp(-(sigma + alpha) * dt / epsilon_0)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(sigma > 0, sigma / (sigma + alpha) * (b - 1.0), 0.0)
    return b, c


class CPML:
    """Auxiliary convolution state for all six faces.

    Only E nodes strictly inside the domain are corrected; tangential E on
    the outer wall stays zero and terminates the layer.
    """

    def __init__(self, shape, npml: int, profile: CPMLProfile, cell_size: float, dt: float,
                 dtype=np.float64):
        self.shape = tuple(shape)
        self.npml = npml
        self.dtype = dtype
        self._e = []
        self._h = []
        n = npml
        for terms, store, is_e in ((_E_TERMS, self._e, True), (_H_TERMS, self._h, False)):
            for fa, da, ga, sign in terms:
                nd = self.shape[da]
                if nd < 2 * n + 2:
                    raise ValueError("grid too small for the requested CPML thickness")
                if is_e:
                    lo_idx = np.arange(1, n)
                    hi_idx = np.arange(nd - n + 1, nd)
                    lo_depth = (n - lo_idx) / n
                    hi_depth = (hi_idx - (nd - n)) / n
                    off = 0
                else:
                    lo_idx = np.arange(0, n)
                    hi_idx = np.arange(nd - n, nd)
                    lo_depth = (n - lo_idx - 0.5) / n
                    hi_depth = (hi_idx + 0.5 - (nd - n)) / n
                    off = 1
                for idx, depth in ((lo_idx, lo_depth), (hi_idx, hi_depth)):
                    b, c = profile_coefficients(depth, profile, cell_size, dt)
                    store.append(dict(fa=fa, da=da, ga=ga, sign=sign, start=int(idx[0]),
                                      count=len(idx), off=off,
                                      b=b.astype(dtype), c=c.astype(dtype), psi=None))

    @staticmethod
    def _view(arr, axis):
        return np.moveaxis(arr, axis, 0)

    def _apply(self, store, f_fields, g_fields, coef, scalar: bool):
        for t in store:
            f = self._view(f_fields[t["fa"]], t["da"])
            g = self._view(g_fields[t["ga"]], t["da"])
            if t["psi"] is None:
                t["psi"] = np.zeros((t["count"],) + f.shape[1:], dtype=self.dtype)
            if scalar:
                kernels.cpml_apply_scalar(f, g, t["psi"], t["b"], t["c"], coef, t["start"],
                                          t["off"], t["sign"])
            else:
                cf = self._view(coef[t["fa"]], t["da"])
                kernels.cpml_apply(f, g, t["psi"], t["b"], t["c"], cf, t["start"], t["off"], t["sign"])

    def apply_e(self, e_fields, h_fields, cb):
        self._apply(self._e, e_fields, h_fields, cb, scalar=False)

    def apply_h(self, h_fields, e_fields, ch):
        self._apply(self._h, h_fields, e_fields, self.dtype(ch), scalar=True)
