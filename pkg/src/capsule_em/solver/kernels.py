"""Compiled Yee update kernels.

Array layout for a grid of (nx, ny, nz) cells:
    Ex (nx, ny+1, nz+1)  Ey (nx+1, ny, nz+1)  Ez (nx+1, ny+1, nz)
    Hx (nx+1, ny, nz)    Hy (nx, ny+1, nz)    Hz (nx, ny, nz+1)
Tangential E on the outer boundary is never updated (PEC walls).
Every output element depends only on the previous field state, so slab
parallelism gives bit-identical results for any thread count.
"""
from __future__ import annotations

import numba

# TBB builds in the wild are often too old; prefer OpenMP and avoid the warning.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from numba import njit, prange  # noqa: E402


@njit(parallel=True, cache=True)
def update_h(hx, hy, hz, ex, ey, ez, ch):
    nx, ny, nz = hy.shape[0], hx.shape[1], hx.shape[2]
    for i in prange(nx + 1):
        for j in range(ny):
            for k in range(nz):
                hx[i, j, k] -= ch * ((ez[i, j + 1, k] - ez[i, j, k]) - (ey[i, j, k + 1] - ey[i, j, k]))
    for i in prange(nx):
        for j in range(ny + 1):
            for k in range(nz):
                hy[i, j, k] -= ch * ((ex[i, j, k + 1] - ex[i, j, k]) - (ez[i + 1, j, k] - ez[i, j, k]))
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz + 1):
                hz[i, j, k] -= ch * ((ey[i + 1, j, k] - ey[i, j, k]) - (ex[i, j + 1, k] - ex[i, j, k]))


@njit(parallel=True, cache=True)
def update_e(ex, ey, ez, hx, hy, hz, cax, cay, caz, cbx, cby, cbz):
    nx, ny, nz = hy.shape[0], hx.shape[1], hx.shape[2]
    for i in prange(nx):
        for j in range(1, ny):
            for k in range(1, nz):
                ex[i, j, k] = cax[i, j, k] * ex[i, j, k] + cbx[i, j, k] * (
                    (hz[i, j, k] - hz[i, j - 1, k]) - (hy[i, j, k] - hy[i, j, k - 1]))
    for i in prange(1, nx):
        for j in range(ny):
            for k in range(1, nz):
                ey[i, j, k] = cay[i, j, k] * ey[i, j, k] + cby[i, j, k] * (
                    (hx[i, j, k] - hx[i, j, k - 1]) - (hz[i, j, k] - hz[i - 1, j, k]))
    for i in prange(1, nx):
        for j in range(1, ny):
            for k in range(nz):
                ez[i, j, k] = caz[i, j, k] * ez[i, j, k] + cbz[i, j, k] * (
                    (hy[i, j, k] - hy[i - 1, j, k]) - (hx[i, j, k] - hx[i, j - 1, k]))


@njit(parallel=True, cache=True)
def debye_update(e_new, e_old, j, idx, cj, kj, bj):
    """Apply the Debye polarization current on the listed dispersive edges.

    ``e_new`` already holds the conductive update; the previous polarization
    current enters with weight ``cj`` and the current is then advanced with
    ``J <- kj J + bj (E_new - E_old)``. ``idx`` are flat indices.
    """
    en = e_new.reshape(-1)
    for n in prange(idx.shape[0]):
        p = idx[n]
        en[p] -= cj[n] * j[n]
        j[n] = kj[n] * j[n] + bj[n] * (en[p] - e_old[n])


@njit(parallel=True, cache=True)
def cpml_apply(f, g, psi, b, c, coef, start, off, sign):
    """CPML correction along the first axis of the (transposed) views.

    psi <- b psi + c (g[idx+off] - g[idx+off-1]);  f[idx] += sign * coef[idx] * psi
    """
    n0, n1, n2 = psi.shape
    for i in prange(n0):
        idx = start + i
        bi = b[i]
        ci = c[i]
        for j in range(n1):
            for k in range(n2):
                p = bi * psi[i, j, k] + ci * (g[idx + off, j, k] - g[idx + off - 1, j, k])
                psi[i, j, k] = p
                f[idx, j, k] += sign * coef[idx, j, k] * p


@njit(parallel=True, cache=True)
def cpml_apply_scalar(f, g, psi, b, c, coef, start, off, sign):
    n0, n1, n2 = psi.shape
    for i in prange(n0):
        idx = start + i
        bi = b[i]
        ci = c[i]
        for j in range(n1):
            for k in range(n2):
                p = bi * psi[i, j, k] + ci * (g[idx + off, j, k] - g[idx + off - 1, j, k])
                psi[i, j, k] = p
                f[idx, j, k] += sign * coef * p


@njit(parallel=True, cache=True)
def dft_accumulate(acc, field, cos_w, sin_w, weight):
    """acc[f] += weight * field * exp(-j w t) for every monitored frequency."""
    nf = acc.shape[0]
    n0, n1, n2 = field.shape
    for i in prange(n0):
        for q in range(nf):
            cr = weight * cos_w[q]
            ci = -weight * sin_w[q]
            for j in range(n1):
                for k in range(n2):
                    v = field[i, j, k]
                    acc[q, i, j, k] += complex(cr * v, ci * v)


def set_workers(n: int | None) -> int:
    """Set the number of compiled-kernel threads; returns the value in effect."""
    if n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()
