from __future__ import annotations

import numpy as np

from capsule_em.analysis.metrics import FrequencySweep

GRID_MHZ = np.round(np.arange(380.0, 480.0 + 1e-9, 0.1), 1)


def _v_shape(lo: float, fc: float, hi: float) -> np.ndarray:
    """|S11| in dB: -10 dB exactly at lo and hi, symmetric -30 dB tip at fc."""
    knots = [GRID_MHZ[0], lo, fc - 0.1, fc, fc + 0.1, hi, GRID_MHZ[-1]]
    vals = [-1.0, -10.0, -29.0, -30.0, -29.0, -10.0, -1.0]
    return np.interp(GRID_MHZ, knots, vals)


def synthetic_sweeps(phases: dict, fi1: float, fi2: float, fc1: float, fc2: float,
                     antenna: str = "synthetic") -> dict[str, FrequencySweep]:
    """ST/SI/LI sweeps whose primitive metrics are exactly the given cells (MHz, degrees).

    ST carries fc1 and SI fc2; the three bands intersect in exactly [fi2, fi1].
    """
    fc_li = round(0.5 * (fi1 + fi2), 1)
    bands = {
        "ST": (fi2, fc1, round(max(fi1, fc1) + 2.0, 1)),
        "SI": (round(min(fi2, fc2) - 2.0, 1), fc2, fi1),
        "LI": (round(fi2 - 1.0, 1), fc_li, round(fi1 + 1.0, 1)),
    }
    out = {}
    for t, (lo, fc, hi) in bands.items():
        mag = 10 ** (_v_shape(lo, fc, hi) / 20)
        s11 = mag * np.exp(1j * np.radians(phases[t]))
        out[t] = FrequencySweep(antenna, t, float("nan"), GRID_MHZ * 1e6, s11)
    return out


# -- acceptance report ----------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def report(number: int, name: str, ok: bool, detail: str) -> None:
    """Record and print one PASS/FAIL line for an acceptance check."""
    line = f"[{'PASS' if ok else 'FAIL'}] {number:2d} {name}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
