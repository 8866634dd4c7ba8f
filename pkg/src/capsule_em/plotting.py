"""Optional figures written next to the CSV outputs (``--plot``)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams.update({"figure.dpi": 120, "axes.grid": True, "grid.alpha": 0.3, "font.size": 9})


def _save(fig, path) -> str:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return str(path)


def plot_s11(path, f, s11, label: str = "", threshold_db: float = -10.0) -> str:
    """|S11| in dB and phase in degrees against frequency in MHz."""
    f = np.asarray(f) / 1e6
    s11 = np.asarray(s11)
    fig, (a1, a2) = plt.subplots(2, 1, sharex=True, figsize=(5, 4.5))
    a1.plot(f, 20 * np.log10(np.abs(s11)), label=label or None)
    a1.axhline(threshold_db, color="0.5", ls="--", lw=0.8)
    a1.set_ylabel("|S11| (dB)")
    a2.plot(f, np.degrees(np.angle(s11)))
    a2.set_ylabel("phase (deg)")
    a2.set_xlabel("frequency (MHz)")
    if label:
        a1.legend()
    return _save(fig, path)


def plot_sweeps(path, sweeps: dict, threshold_db: float = -10.0) -> str:
    """Overlay of several :class:`FrequencySweep` magnitudes."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, sw in sweeps.items():
        ax.plot(sw.f / 1e6, sw.mag_db, label=name)
    ax.axhline(threshold_db, color="0.5", ls="--", lw=0.8)
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel("|S11| (dB)")
    ax.legend()
    return _save(fig, path)


def plot_cuts(path, cuts: dict) -> str:
    """Polar gain cuts, one curve per phi plane."""
    fig = plt.figure(figsize=(4.5, 4.5))
    ax = fig.add_subplot(projection="polar")
    for phi, (th, g) in sorted(cuts.items()):
        ax.plot(np.radians(th), g, label=f"phi = {phi:g} deg")
    ax.set_theta_zero_location("N")
    ax.set_theta_direction(-1)
    ax.legend(loc="lower left", fontsize=7)
    return _save(fig, path)


def plot_thickness(path, rows: list[dict]) -> str:
    ok = [r for r in rows if r["converged"]]
    t = [r["t_mm"] for r in ok]
    fig, a1 = plt.subplots(figsize=(5, 3.5))
    a1.plot(t, [r["gain_dbi"] for r in ok], "o-", color="C0")
    a1.set_xlabel("shell thickness (mm)")
    a1.set_ylabel("peak gain (dBi)", color="C0")
    a2 = a1.twinx()
    a2.plot(t, [r["efficiency_pct"] for r in ok], "s--", color="C1")
    a2.set_ylabel("efficiency (%)", color="C1")
    return _save(fig, path)


def plot_frequency(path, rows: list[dict]) -> str:
    f = [r["f_MHz"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(f, [r["bound_electric"] for r in rows], "-", label="electric model bound")
    ax.semilogy(f, [r["bound_magnetic"] for r in rows], "-", label="magnetic model bound")
    ax.semilogy(f, [r["efficiency"] for r in rows], "o", label="antenna")
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel("radiation efficiency")
    ax.legend()
    return _save(fig, path)


def plot_bounds(path, f, eta_e, eta_m) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(np.asarray(f) / 1e6, eta_e, label="electric")
    ax.semilogy(np.asarray(f) / 1e6, eta_m, label="magnetic")
    ax.set_xlabel("frequency (MHz)")
    ax.set_ylabel("model efficiency bound")
    ax.legend()
    return _save(fig, path)
