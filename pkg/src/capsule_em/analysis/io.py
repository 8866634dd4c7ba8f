"""Sweep CSV input/output and the shipped reference tables."""
from __future__ import annotations

import csv
import io
from importlib import resources

import numpy as np

from .metrics import FrequencySweep

SWEEP_HEADER = ["f_hz", "re_s11", "im_s11"]


def write_sweep_csv(path, f, s11) -> None:
    """Write (f_hz, re_s11, im_s11) rows with round-trip float formatting."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for fk, sk in zip(np.asarray(f, dtype=float), np.asarray(s11, dtype=complex)):
            w.writerow([repr(float(fk)), repr(float(sk.real)), repr(float(sk.imag))])


def read_sweep_csv(path, antenna: str = "", tissue: str = "", t: float = float("nan")) -> FrequencySweep:
    """Read a sweep CSV (also accepts VNA exports with the same three columns).

    Lines starting with ``#`` or ``!`` are comments.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith(("#", "!"))]
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    try:
        cols = [header.index(h) for h in SWEEP_HEADER]
    except ValueError:
        raise ValueError(f"{path}: expected columns {SWEEP_HEADER}, got {header}") from None
    rows = [[float(r[c]) for c in cols] for r in reader if r]
    data = np.array(rows, dtype=float)
    return FrequencySweep(antenna, tissue, t, data[:, 0], data[:, 1] + 1j * data[:, 2])


def _data_text(name: str) -> str:
    return resources.files("capsule_em.data").joinpath(name).read_text()


def load_table(name: str) -> list[dict]:
    """Rows of a shipped CSV (``sensing_results.csv``, ``thickness_extrema.csv``).

    Numeric cells become floats, empty cells None.
    """
    lines = [ln for ln in _data_text(name).splitlines() if ln and not ln.startswith("#")]
    out = []
    for rec in csv.DictReader(io.StringIO("\n".join(lines))):
        row = {}
        for k, v in rec.items():
            if v == "":
                row[k] = None
                continue
            try:
                row[k] = float(v)
            except ValueError:
                row[k] = v
        out.append(row)
    return out


def write_table_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow(["" if r.get(c) is None else _fmt(r.get(c)) for c in columns])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return v
