"""Accepted, dissipated and radiated power, far-field patterns and cuts.

Far fields follow from the surface equivalence principle on a Huygens box
in air: J = n x H, M = -n x E, radiation vectors N and L, and

    U(theta, phi) = k^2 / (32 pi^2 eta) (|L_phi + eta N_theta|^2 + |L_theta - eta N_phi|^2)

with the e^{+j w t} phasor convention used by the running Fourier sums.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C0, epsilon_0, mu_0
from scipy.integrate import trapezoid

from .solver.monitors import HuygensBox, VolumeMonitor
from .solver.port import PortRecord, accepted_power, available_power

ETA0 = math.sqrt(mu_0 / epsilon_0)

__all__ = [
    "ConfigurationError", "FarField", "RadiationSolution", "accepted_power", "available_power",
    "dissipated_power", "nf2ff", "pattern_cuts", "solve_radiation", "angular_grid",
]


class ConfigurationError(ValueError):
    """Monitor placement violates a post-processing precondition."""


def angular_grid(step_deg: float = 2.0):
    """theta in [0, 180] and phi in [0, 360) in degrees."""
    theta = np.arange(0.0, 180.0 + 1e-9, step_deg)
    phi = np.arange(0.0, 360.0 - 1e-9, step_deg)
    return theta, phi


@dataclass
class FarField:
    f: float
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    U: np.ndarray  # (n_theta, n_phi) W/sr (spectral units of the run)

    @property
    def p_radiated(self) -> float:
        return integrate_sphere(self.theta_deg, self.phi_deg, self.U)

    def directivity(self) -> np.ndarray:
        return 4.0 * math.pi * self.U / self.p_radiated


def integrate_sphere(theta_deg, phi_deg, values) -> float:
    """Trapezoidal integral of ``values`` over the sphere (periodic in phi)."""
    th = np.radians(theta_deg)
    ph = np.radians(phi_deg)
    closed = np.concatenate([values, values[:, :1]], axis=1)
    ph_closed = np.concatenate([ph, [ph[0] + 2.0 * math.pi]])
    inner = trapezoid(closed, ph_closed, axis=1)
    return float(trapezoid(inner * np.sin(th), th))


def dissipated_power(volume: VolumeMonitor, sigma_fields, cell_size: float, q: int = 0) -> float:
    """0.5 sum(sigma |E|^2) dV over the monitored lossy edges."""
    return volume.dissipated_power(sigma_fields, cell_size, q)


def nf2ff(box: HuygensBox, q: int = 0, step_deg: float = 2.0, sigma_fields=None) -> FarField:
    """Far-zone radiation intensity from the tangential phasors on ``box``.

    If ``sigma_fields`` is given, a box face touching a lossy edge raises
    :class:`ConfigurationError`.
    """
    if sigma_fields is not None:
        _check_box_in_air(box, sigma_fields)
    f = float(box.freqs[q])
    k = 2.0 * math.pi * f / C0
    theta, phi = angular_grid(step_deg)
    th, ph = np.meshgrid(np.radians(theta), np.radians(phi), indexing="ij")
    rhat = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)
    rhat = rhat.reshape(-1, 3)
    N = np.zeros((rhat.shape[0], 3), dtype=np.complex128)
    L = np.zeros_like(N)
    for g in box.face_grids():
        # J = n x H lies along ea; M = -n x E lies along other.
        s_j = g.side * _levi(g.normal, g.other, g.ea)
        s_m = -g.side * _levi(g.normal, g.ea, g.other)
        pa = np.exp(1j * k * np.outer(rhat[:, g.ea], g.x_ea)) * g.w_ea
        po = np.exp(1j * k * np.outer(rhat[:, g.other], g.x_other)) * g.w_other
        pn = np.exp(1j * k * rhat[:, g.normal] * g.plane)
        N[:, g.ea] += s_j * pn * np.einsum("da,do,ao->d", pa, po, g.h[q], optimize=True)
        L[:, g.other] += s_m * pn * np.einsum("da,do,ao->d", pa, po, g.e[q], optimize=True)
    ct, st = np.cos(th).ravel(), np.sin(th).ravel()
    cp, sp = np.cos(ph).ravel(), np.sin(ph).ravel()
    n_th = N[:, 0] * ct * cp + N[:, 1] * ct * sp - N[:, 2] * st
    n_ph = -N[:, 0] * sp + N[:, 1] * cp
    l_th = L[:, 0] * ct * cp + L[:, 1] * ct * sp - L[:, 2] * st
    l_ph = -L[:, 0] * sp + L[:, 1] * cp
    U = k**2 / (32.0 * math.pi**2 * ETA0) * (np.abs(l_ph + ETA0 * n_th) ** 2
                                              + np.abs(l_th - ETA0 * n_ph) ** 2)
    return FarField(f, theta, phi, U.reshape(th.shape))


def _levi(a, b, c) -> float:
    return float(round(np.linalg.det(np.eye(3)[[a, b, c]])))


def _check_box_in_air(box: HuygensBox, sigma_fields) -> None:
    for axis in range(3):
        sig = sigma_fields[axis]
        for a in range(3):
            for plane in (box.lo[a], box.hi[a]):
                sl = [slice(box.lo[b], box.hi[b] + 1) for b in range(3)]
                sl[a] = slice(max(plane - 1, 0), plane + 1)
                if np.any(sig[tuple(sl)] > 0):
                    raise ConfigurationError("Huygens box intersects lossy media")


def pattern_cuts(theta_deg, phi_deg, gain_dbi, cuts=(0.0, 90.0)) -> dict[float, tuple[np.ndarray, np.ndarray]]:
    """Gain versus theta over (-180, 180] in the planes phi = c and phi = c + 180.

    Negative theta is read from the opposite half plane, so each cut is a
    full great circle through the poles.
    """
    theta_deg = np.asarray(theta_deg, dtype=float)
    phi_deg = np.asarray(phi_deg, dtype=float)
    out = {}
    for c in cuts:
        i0 = _phi_index(phi_deg, c)
        i1 = _phi_index(phi_deg, (c + 180.0) % 360.0)
        front = gain_dbi[:, i0]
        back = gain_dbi[::-1, i1][:-1]  # theta from 180 down to step, mirrored negative
        th = np.concatenate([-theta_deg[::-1][:-1], theta_deg])
        g = np.concatenate([back, front])
        keep = th > -180.0 + 1e-9
        out[float(c)] = (th[keep], g[keep])
    return out


def _phi_index(phi_deg, value) -> int:
    diff = np.abs((phi_deg - value + 180.0) % 360.0 - 180.0)
    i = int(np.argmin(diff))
    if diff[i] > 1e-6:
        raise ValueError(f"pattern lacks phi = {value} deg")
    return i


@dataclass
class RadiationSolution:
    f: float
    p_accepted: float
    p_dissipated: float
    p_radiated: float
    efficiency: float
    theta_deg: np.ndarray
    phi_deg: np.ndarray
    gain_dbi: np.ndarray
    cuts: dict
    p_available: float = float("nan")
    p_poynting: float = float("nan")
    directivity_max_dbi: float = float("nan")
    flags: list[str] = field(default_factory=list)

    @property
    def balance_error(self) -> float:
        return abs(self.p_accepted - self.p_dissipated - self.p_radiated) / self.p_accepted

    @property
    def max_gain_dbi(self) -> float:
        return float(np.max(self.gain_dbi))

    @property
    def realized_gain_dbi(self) -> float:
        """Peak gain referred to the available source power."""
        return self.max_gain_dbi + 10.0 * math.log10(self.p_accepted / self.p_available)

    @property
    def efficiency_db(self) -> float:
        return 10.0 * math.log10(self.efficiency)

    def summary(self) -> dict:
        return {
            "f_hz": self.f,
            "p_accepted": self.p_accepted,
            "p_dissipated": self.p_dissipated,
            "p_radiated": self.p_radiated,
            "p_radiated_poynting": self.p_poynting,
            "efficiency": self.efficiency,
            "efficiency_db": self.efficiency_db,
            "gain_max_dbi": self.max_gain_dbi,
            "realized_gain_max_dbi": self.realized_gain_dbi,
            "directivity_max_dbi": self.directivity_max_dbi,
            "power_balance_error": self.balance_error,
            "flags": list(self.flags),
        }

    def write_pattern_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta_deg", "phi_deg", "gain_dbi"])
            for i, t in enumerate(self.theta_deg):
                for j, p in enumerate(self.phi_deg):
                    w.writerow([f"{t:g}", f"{p:g}", f"{self.gain_dbi[i, j]:.6f}"])

    def write_cut_csv(self, path, phi: float) -> None:
        th, g = self.cuts[float(phi)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta_deg", "gain_dbi"])
            for t, v in zip(th, g):
                w.writerow([f"{t:g}", f"{v:.6f}"])


def solve_radiation(record: PortRecord | None, volume: VolumeMonitor | None,
                    box: HuygensBox, sigma_fields, cell_size: float, q: int = 0,
                    step_deg: float = 2.0, p_accepted: float | None = None) -> RadiationSolution:
    """Combine port, volume and surface phasors into a :class:`RadiationSolution`."""
    f = float(box.freqs[q])
    flags = []
    if p_accepted is None:
        p_acc = float(accepted_power(record, f)[0])
        p_av = float(available_power(record, f)[0])
    else:
        p_acc, p_av = float(p_accepted), float("nan")
    if not p_acc > 0:
        flags.append("non_positive_accepted_power")
    p_diss = dissipated_power(volume, sigma_fields, cell_size, q) if volume is not None else 0.0
    ff = nf2ff(box, q, step_deg, sigma_fields)
    p_rad = ff.p_radiated
    eta = p_rad / p_acc if p_acc > 0 else float("nan")
    if eta > 1.0:
        flags.append("efficiency_above_one")
    eta_c = float(np.clip(eta, 1e-300, 1.0)) if math.isfinite(eta) else float("nan")
    gain = 4.0 * math.pi * ff.U / p_acc
    gain_db = 10.0 * np.log10(np.maximum(gain, 1e-300))
    cuts = pattern_cuts(ff.theta_deg, ff.phi_deg, gain_db)
    return RadiationSolution(f, p_acc, p_diss, p_rad, eta_c, ff.theta_deg, ff.phi_deg, gain_db, cuts,
                             p_available=p_av, p_poynting=box.poynting_flux(q),
                             directivity_max_dbi=float(10.0 * np.log10(np.max(ff.directivity()))),
                             flags=flags)
