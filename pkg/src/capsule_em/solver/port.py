"""Lumped port, optional series RLC load, port records and S11 extraction."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import epsilon_0


class OutOfBandError(ValueError):
    """Requested frequency lies outside the excitation bandwidth."""


@dataclass(frozen=True)
class SeriesRLC:
    """Series R-L-C branch; ``C = inf`` removes the capacitor."""

    R: float = 50.0
    L: float = 0.0
    C: float = math.inf

    def __post_init__(self):
        if self.R < 0 or self.L < 0 or self.C <= 0:
            raise ValueError("RLC elements must be non-negative (C > 0)")
        if self.R == 0 and self.L == 0:
            raise ValueError("a load needs R > 0 or L > 0")

    def split(self, n: int) -> "SeriesRLC":
        return SeriesRLC(self.R / n, self.L / n, self.C * n)


@dataclass
class LumpedPort:
    """Thevenin source (and optional parallel load) spread over a line of edges.

    ``edges`` are (i, j, k) indices of E components along ``axis``; the
    positive terminal sits at the end of the line in the direction
    ``sign`` * axis. Multiple edges are in series, each carrying an equal
    share of the source voltage and resistance.
    """

    axis: int
    edges: list[tuple[int, int, int]]
    sign: int = 1
    z0: float = 50.0
    load: SeriesRLC | None = None
    active: bool = True

    def __post_init__(self):
        if self.axis not in (0, 1, 2):
            raise ValueError("port axis must be 0, 1 or 2")
        if self.sign not in (1, -1):
            raise ValueError("port sign must be +1 or -1")
        if not self.edges:
            raise ValueError("port needs at least one edge")
        if self.z0 <= 0:
            raise ValueError("reference impedance must be positive")
        self.edges = [tuple(int(v) for v in e) for e in self.edges]

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def _raw_curl(axis, h, i, j, k):
    hx, hy, hz = h
    if axis == 0:
        return (hz[i, j, k] - hz[i, j - 1, k]) - (hy[i, j, k] - hy[i, j, k - 1])
    if axis == 1:
        return (hx[i, j, k] - hx[i, j, k - 1]) - (hz[i, j, k] - hz[i - 1, j, k])
    return (hy[i, j, k] - hy[i - 1, j, k]) - (hx[i, j, k] - hx[i, j - 1, k])


class PortState:
    """Implicit per-edge update of the port stamp.

    Ampere's law on a port edge, with the oriented field E_d = sign * E:
        eps dE/dt + sigma E + (I_src - I_load) / A = curl H
    with I_src = (V_s + d E_d) / R_s through the source branch and the load
    obeying V = R I + L dI/dt + Q / C, both trapezoidal in time.
    """

    def __init__(self, port: LumpedPort, eps_r, sigma, cell_size: float, dt: float):
        self.port = port
        n = port.n_edges
        self.d = cell_size
        self.area = cell_size**2
        self.dt = dt
        self.rs = port.z0 / n
        self.eps = epsilon_0 * np.asarray(eps_r, dtype=float)
        self.sigma = np.asarray(sigma, dtype=float)
        self.load = port.load.split(n) if port.load is not None else None
        self.i_load = np.zeros(n)
        self.q_load = np.zeros(n)
        if self.load is not None:
            ld = self.load
            inv_c = 0.0 if math.isinf(ld.C) else 1.0 / ld.C
            self._alpha = ld.L / dt + ld.R / 2.0 + dt * inv_c / 4.0
            self._beta = ld.L / dt - ld.R / 2.0 - dt * inv_c / 4.0
            self._inv_c = inv_c
        self.e_old = np.zeros(n)

    def save(self, e_fields):
        a = self.port.axis
        for n, (i, j, k) in enumerate(self.port.edges):
            self.e_old[n] = e_fields[a][i, j, k]

    def update(self, e_fields, h_fields, v_src: float) -> tuple[float, float]:
        """Overwrite the port edges; returns (port voltage, port current)."""
        p = self.port
        a, s = p.axis, p.sign
        d, area, dt, rs = self.d, self.area, self.dt, self.rs
        vs = v_src / p.n_edges
        v_total = 0.0
        i_total = 0.0
        for n, (i, j, k) in enumerate(p.edges):
            e0 = s * self.e_old[n]
            curl = s * _raw_curl(a, h_fields, i, j, k) / d
            eps_dt = self.eps[n] / dt
            g = 0.5 * self.sigma[n] + d / (2.0 * rs * area)
            rhs = curl - vs / (rs * area)
            if self.load is not None:
                a0 = (-self.q_load[n] * self._inv_c + self.i_load[n] * self._beta) / self._alpha
                a1 = -d / (2.0 * self._alpha)
                g -= a1 / (2.0 * area)
                rhs += (a0 + self.i_load[n]) / (2.0 * area)
            e1 = (e0 * (eps_dt - g) + rhs) / (eps_dt + g)
            if self.load is not None:
                i1 = a1 * (e1 + e0) + a0
                self.q_load[n] += 0.5 * dt * (i1 + self.i_load[n])
                self.i_load[n] = i1
            e_fields[a][i, j, k] = s * e1
            v_total += -d * e1
            i_total += (vs + 0.5 * d * (e1 + e0)) / rs
        return v_total, i_total / p.n_edges


@dataclass
class PortRecord:
    """Port voltage and current series of one run.

    ``v[n]`` is sampled at ``(n + 1) dt``; ``i[n]`` and ``source[n]`` at
    ``(n + 1/2) dt``.
    """

    dt: float
    v: np.ndarray
    i: np.ndarray
    source: np.ndarray
    z0: float = 50.0
    band: tuple[float, float] = (0.0, math.inf)
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.i = np.asarray(self.i, dtype=float)
        self.source = np.asarray(self.source, dtype=float)
        if not (len(self.v) == len(self.i) == len(self.source)):
            raise ValueError("port series must have equal lengths")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def t_v(self) -> np.ndarray:
        return (np.arange(len(self.v)) + 1.0) * self.dt

    @property
    def t_i(self) -> np.ndarray:
        return (np.arange(len(self.i)) + 0.5) * self.dt

    def check_band(self, f) -> np.ndarray:
        f = np.atleast_1d(np.asarray(f, dtype=float))
        lo, hi = self.band
        bad = f[(f < lo * (1 - 1e-12)) | (f > hi * (1 + 1e-12))]
        if bad.size:
            raise OutOfBandError(
                f"frequencies {bad.tolist()} Hz lie outside the excitation band "
                f"[{lo:.6g}, {hi:.6g}] Hz")
        return f

    def phasors(self, f):
        """Fourier sums of (V, I, source) at exactly the requested frequencies."""
        f = self.check_band(f)
        w = 2.0 * math.pi * f[:, None]
        kv = np.exp(-1j * w * self.t_v[None, :]) * self.dt
        ki = np.exp(-1j * w * self.t_i[None, :]) * self.dt
        return kv @ self.v, ki @ self.i, ki @ self.source

    def waves(self, f):
        v, i, _ = self.phasors(f)
        root = 2.0 * math.sqrt(self.z0)
        return (v + self.z0 * i) / root, (v - self.z0 * i) / root

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_v_s", "v_V", "t_i_s", "i_A", "source_V"])
            for row in zip(self.t_v, self.v, self.t_i, self.i, self.source):
                w.writerow([repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path, z0: float = 50.0, band=(0.0, math.inf)) -> "PortRecord":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        dt = float(data[0, 0])  # first voltage sample sits at t = dt
        return cls(dt, data[:, 1], data[:, 3], data[:, 4], z0=z0, band=band)


def extract_s11(record: PortRecord, f_grid) -> np.ndarray:
    """Complex S11 = B/A from the port wave decomposition at ``f_grid``."""
    a, b = record.waves(f_grid)
    return b / a


def accepted_power(record: PortRecord, f) -> np.ndarray:
    """0.5 Re{V I*} from the port Fourier sums (spectral-density units)."""
    v, i, _ = record.phasors(f)
    return 0.5 * np.real(v * np.conj(i))


def available_power(record: PortRecord, f) -> np.ndarray:
    """Power a matched load would draw from the source, |V_s|^2 / (8 Z0)."""
    _, _, s = record.phasors(f)
    return np.abs(s) ** 2 / (8.0 * record.z0)


def series_inductance_s11(s11, f, inductance: float, z0: float = 50.0) -> np.ndarray:
    """S11 seen through an ideal series inductor placed in front of the port.

    The network is lossless, so accepted power, efficiency and gain are
    unchanged; only the match (and hence phase and realized gain) moves.
    """
    s11 = np.asarray(s11, dtype=complex)
    if inductance == 0:
        return s11
    # bilinear form of Z' = Z + j w L, regular at S = 1
    x = 1j * math.pi * np.asarray(f, dtype=float) * inductance / z0
    return (s11 + x * (1.0 - s11)) / (1.0 + x * (1.0 - s11))
