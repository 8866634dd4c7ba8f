"""Command-line interface: simulate, metrics, sweep, oracle, classify."""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__

log = logging.getLogger("capsule_em")

EXIT_OK = 0
EXIT_ERROR = 1  # I/O and unexpected failures
EXIT_VALIDATION = 2  # bad configuration or input data
EXIT_NOT_CONVERGED = 3  # solver run hit max_steps before the decay criterion
EXIT_ORACLE = 4  # oracle series did not converge


class CLIError(Exception):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# helpers


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _outdir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _manifest(out: Path, cfg, outputs: list[str], **extra) -> dict:
    missing = [f for f in outputs if not (out / f).exists()]
    if missing:
        raise CLIError(f"outputs missing at manifest time: {missing}", EXIT_ERROR)
    doc = {"tool": "capsule-em", "version": __version__, "scene_hash": cfg.scene_hash,
           "config": cfg.text, "dimension_set": cfg.dimension_set, "outputs": sorted(outputs)}
    doc.update(extra)
    write_json(out / "manifest.json", doc)
    return doc


def _load(path):
    from .config import load_config

    try:
        return load_config(path)
    except FileNotFoundError:
        raise CLIError(f"config file not found: {path}", EXIT_ERROR) from None


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    from .analysis.io import write_sweep_csv
    from .simulate import WORKERS_ENV, run_config

    cfg = _load(args.config)
    if args.workers:
        os.environ[WORKERS_ENV] = str(args.workers)
    out = _outdir(args.out)
    run = run_config(cfg, f_rad=args.f_rad)
    outputs = ["port.csv", "s11.csv"]
    run.result.record.to_csv(out / "port.csv")
    write_sweep_csv(out / "s11.csv", run.freqs, run.s11)
    rad = run.radiation
    if rad is not None:
        write_json(out / "radiation.json", rad.summary())
        rad.write_pattern_csv(out / "pattern.csv")
        outputs += ["radiation.json", "pattern.csv"]
        for phi in sorted(rad.cuts):
            name = f"cut_phi{phi:g}.csv"
            rad.write_cut_csv(out / name, phi)
            outputs.append(name)
    if args.dump_grid:
        run.grid.dump(out / "grid.bin")
        outputs.append("grid.bin")
    if args.plot:
        from . import plotting

        plotting.plot_s11(out / "s11.png", run.freqs, run.s11, cfg.scene.phantom_material)
        outputs.append("s11.png")
        if rad is not None:
            plotting.plot_cuts(out / "pattern_cuts.png", rad.cuts)
            outputs.append("pattern_cuts.png")
    g = run.grid
    _manifest(out, cfg, outputs, grid={"dims": list(g.dims), "cell_size_mm": g.cell_size,
                                       "content_hash": g.content_hash()},
              dt_s=run.info["dt"], steps=run.result.steps, converged=run.converged,
              realized_feed_gap_mm=g.realized_gap, geometry_warnings=list(g.warnings),
              radiation=None if rad is None else rad.summary(), seed=args.seed)
    i = int(np.argmin(np.abs(run.freqs - (args.f_rad or cfg.solver.sim.excitation.center))))
    s = run.s11[i]
    print(f"steps {run.result.steps}  converged {run.converged}  "
          f"S11({run.freqs[i] / 1e6:.1f} MHz) = {20 * math.log10(abs(s)):.2f} dB, "
          f"{math.degrees(math.atan2(s.imag, s.real)):.1f} deg")
    if rad is not None:
        print(f"efficiency {rad.efficiency:.4g} ({rad.efficiency_db:.2f} dB)  peak gain "
              f"{rad.max_gain_dbi:.2f} dBi  balance error {rad.balance_error:.2e}")
    print(f"wrote {out}")
    return EXIT_OK if run.converged else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------------------
# metrics


def cmd_metrics(args) -> int:
    from .analysis.io import read_sweep_csv, write_table_csv
    from .analysis.metrics import MetricError, compute_metrics

    files = {"ST": args.st, "SI": args.si, "LI": args.li}
    sweeps = {}
    for tissue, path in files.items():
        try:
            sweeps[tissue] = read_sweep_csv(path, args.antenna, tissue)
        except FileNotFoundError:
            raise CLIError(f"sweep file not found: {path}", EXIT_ERROR) from None
        except ValueError as exc:
            raise CLIError(str(exc)) from None
    ref = sweeps["ST"].f
    bad = [files[t] for t, s in sweeps.items() if s.f.shape != ref.shape or np.any(s.f != ref)]
    if bad:
        raise CLIError(f"sweeps do not share a frequency grid with {files['ST']}: {', '.join(bad)}")
    try:
        m = compute_metrics(sweeps, args.f_phase, args.threshold, args.fc_method)
    except MetricError as exc:
        raise CLIError(str(exc)) from None
    out = _outdir(args.out)
    doc = m.to_dict()
    doc.update({"antenna": args.antenna, "threshold_db": args.threshold, "f_phase_hz": args.f_phase,
                "f_resolution_hz": float(np.min(np.diff(ref))), "inputs": files})
    write_json(out / "metrics.json", doc)
    row = _metrics_row(args.antenna, m)
    write_table_csv(out / "metrics.csv", [row])
    if args.plot:
        from . import plotting

        plotting.plot_sweeps(out / "sweeps.png", sweeps, args.threshold)
    _print_metrics(m)
    return EXIT_OK


def _metrics_row(antenna: str, m) -> dict:
    row = {"antenna": antenna}
    for t, v in m.phase_434.items():
        row[f"phase_{t}_deg"] = v
    for k, v in m.phase_diff.items():
        row[f"diff_{k.replace('-', '_')}_deg"] = v
    row.update({"fi1_MHz": m.fi1, "fi2_MHz": m.fi2, "delta_fi_MHz": m.delta_fi,
                "delta_fi_empty": m.delta_fi is None,
                "fc1_MHz": m.fc1, "fc2_MHz": m.fc2, "fc_diff_MHz": m.fc_diff,
                "flags": m.flags})
    return row


def _fmt(v, spec=".1f"):
    return "empty" if v is None else format(v, spec)


def _print_metrics(m) -> None:
    print("phase at 434 MHz: " + ", ".join(f"{t} {v:.1f}" for t, v in m.phase_434.items()))
    print("phase differences: " + ", ".join(f"{k} {v:.1f}" for k, v in m.phase_diff.items()))
    print(f"matched interval: fi2 {_fmt(m.fi2)}  fi1 {_fmt(m.fi1)}  delta {_fmt(m.delta_fi)} MHz")
    print(f"centre frequencies ({m.fc_method}): "
          + ", ".join(f"{t} {_fmt(v, '.2f')}" for t, v in m.fc.items())
          + f"  spread {_fmt(m.fc_diff, '.2f')} MHz")
    if m.flags:
        print("flags: " + ", ".join(m.flags))


def cmd_table(args) -> int:
    """Recompute the derived cells of the shipped sensing table from its primitive cells."""
    from .analysis.io import load_table, write_table_csv
    from .analysis.metrics import derive_metrics

    rows = []
    for r in load_table("sensing_results.csv"):
        phases = {t: r[f"phase_{t}_deg"] for t in ("ST", "SI", "LI")}
        m = derive_metrics(phases, r["fi1_MHz"], r["fi2_MHz"], fc1=r["fc1_MHz"], fc2=r["fc2_MHz"])
        out = {"antenna": r["antenna"], "t_mm": r["t_mm"], "source": r["source"],
               "diff_ST_SI_deg": round(m.phase_diff["ST-SI"], 1),
               "diff_SI_LI_deg": round(m.phase_diff["SI-LI"], 1),
               "delta_fi_MHz": None if m.delta_fi is None else round(m.delta_fi, 1),
               "fc_diff_MHz": None if m.fc_diff is None else round(m.fc_diff, 1)}
        for k in ("diff_ST_SI_deg", "diff_SI_LI_deg", "delta_fi_MHz", "fc_diff_MHz"):
            out[f"{k}_published"] = r[k]
        rows.append(out)
        print(f"{r['antenna']:7s} t={r['t_mm']:.1f} {r['source']:9s} "
              f"ST-SI {out['diff_ST_SI_deg']:6.1f} ({r['diff_ST_SI_deg']})  "
              f"SI-LI {out['diff_SI_LI_deg']:6.1f} ({r['diff_SI_LI_deg']})  "
              f"dfi {_fmt(out['delta_fi_MHz'])} ({r['delta_fi_MHz']})  "
              f"dfc {_fmt(out['fc_diff_MHz'])} ({r['fc_diff_MHz']})")
    if args.out:
        write_table_csv(args.out, rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def cmd_sweep(args) -> int:
    from .analysis.io import write_table_csv
    from .analysis.sweeps import (
        EXTREMA_COLUMNS, FREQUENCY_COLUMNS, THICKNESS_COLUMNS, sweep_frequencies, sweep_shell_thickness,
    )

    cfg = _load(args.config)
    out = _outdir(args.out)
    workers = args.workers or cfg.sweep.workers
    outputs = []
    if args.kind == "thickness":
        rows, ext = sweep_shell_thickness(cfg, args.t, args.f, workers=workers)
        write_table_csv(out / "thickness_sweep.csv", rows, THICKNESS_COLUMNS)
        write_table_csv(out / "thickness_extrema.csv", [ext], EXTREMA_COLUMNS)
        outputs += ["thickness_sweep.csv", "thickness_extrema.csv"]
        for r in rows:
            print(f"t {r['t_mm']:.2f} mm  [{r['dimension_set']}]  gain {r['gain_dbi']:.2f} dBi  "
                  f"eff {r['efficiency_pct']:.4f} %  {' '.join(r['flags'])}")
        if args.plot:
            from . import plotting

            plotting.plot_thickness(out / "thickness_sweep.png", rows)
            outputs.append("thickness_sweep.png")
    else:
        rows = sweep_frequencies(cfg, args.f_list, workers=workers)
        write_table_csv(out / "frequency_sweep.csv", rows, FREQUENCY_COLUMNS)
        outputs.append("frequency_sweep.csv")
        for r in rows:
            print(f"f {r['f_MHz']:.0f} MHz  eff {r['efficiency']:.4g}  bounds e {r['bound_electric']:.4g} "
                  f"m {r['bound_magnetic']:.4g}  {' '.join(r['flags'])}")
        if args.plot:
            from . import plotting

            plotting.plot_frequency(out / "frequency_sweep.png", rows)
            outputs.append("frequency_sweep.png")
    failed = [r for r in rows if not r["converged"]]
    _manifest(out, cfg, outputs, sweep=args.kind, points=len(rows), failed_points=len(failed),
              seed=args.seed)
    print(f"wrote {out}")
    return EXIT_NOT_CONVERGED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# oracle


def cmd_oracle(args) -> int:
    from .oracles.mie import ConvergenceError

    try:
        return _ORACLES[args.kind](args)
    except ConvergenceError as exc:
        print(f"oracle did not converge: {exc} (residual {exc.residual:.3g})", file=sys.stderr)
        return EXIT_ORACLE


def _oracle_mie(args) -> int:
    from .oracles.mie import mie_lossy_sphere

    res = mie_lossy_sphere(args.radius_mm * 1e-3, args.eps_r, args.sigma, args.f)
    doc = {"radius_m": args.radius_mm * 1e-3, "eps_r": args.eps_r, "sigma": args.sigma, "f_hz": args.f,
           "c_ext_m2": res.extinction, "c_sca_m2": res.scattering, "c_abs_m2": res.absorption,
           "n_terms": res.n_terms, "size_parameter": res.size_parameter,
           "p_abs_w_per_unit_e0": res.absorbed_power(1.0)}
    return _emit(args, doc)


def _oracle_planewave(args) -> int:
    from .oracles.propagation import plane_wave_attenuation

    pc = plane_wave_attenuation(args.eps_r, args.sigma, args.f)
    doc = {"f_hz": args.f, "eps_r": args.eps_r, "sigma": args.sigma, "alpha_np_per_m": pc.alpha,
           "beta_rad_per_m": pc.beta, "skin_depth_m": pc.skin_depth, "wavelength_m": pc.wavelength}
    return _emit(args, doc)


def _oracle_bound(args) -> int:
    from .analysis.io import write_table_csv
    from .analysis.sweeps import frequency_bounds
    from .oracles.bounds import BoundGeometry

    g = BoundGeometry(*args.geometry)
    rows = []
    for f in args.f_list:
        be, bm = frequency_bounds(args.material, f, g)
        rows.append({"f_hz": f, "eta_electric": be, "eta_magnetic": bm})
        print(f"{f / 1e6:8.1f} MHz  electric {be:.4e}  magnetic {bm:.4e}  (model bound)")
    if args.out:
        write_table_csv(args.out, rows, ["f_hz", "eta_electric", "eta_magnetic"])
        if args.plot:
            from . import plotting

            plotting.plot_bounds(Path(args.out).with_suffix(".png"), args.f_list,
                                 [r["eta_electric"] for r in rows], [r["eta_magnetic"] for r in rows])
    return EXIT_OK


def _oracle_circuit(args) -> int:
    from .analysis.io import write_sweep_csv
    from .oracles.circuit import circuit_s11

    f = np.linspace(args.f_start, args.f_stop, args.n)
    s = circuit_s11(args.R, args.L, args.C, args.z0, f)
    if args.out:
        write_sweep_csv(args.out, f, s)
    for fk, sk in zip(f, s):
        print(f"{fk / 1e6:9.3f} MHz  {20 * math.log10(max(abs(sk), 1e-300)):8.3f} dB  "
              f"{math.degrees(math.atan2(sk.imag, sk.real)):8.2f} deg")
    return EXIT_OK


def _emit(args, doc) -> int:
    for k, v in doc.items():
        print(f"{k}: {v:.6g}" if isinstance(v, float) else f"{k}: {v}")
    if args.out:
        write_json(args.out, doc)
    return EXIT_OK


_ORACLES = {"mie": _oracle_mie, "planewave": _oracle_planewave, "bound": _oracle_bound,
            "circuit": _oracle_circuit}


# ---------------------------------------------------------------------------
# classify


def _references(text: str) -> dict[str, float]:
    out = {}
    for item in text.split(","):
        name, _, val = item.partition("=")
        if not val:
            raise argparse.ArgumentTypeError(f"expected NAME=PHASE pairs, got {item!r}")
        out[name.strip()] = float(val)
    return out


def cmd_classify(args) -> int:
    from .analysis.classify import ClassifierModel, classify_tissue

    if args.model:
        try:
            model = ClassifierModel.from_json(args.model)
        except (OSError, KeyError, ValueError) as exc:
            raise CLIError(f"invalid classifier model {args.model}: {exc}") from None
    elif args.references:
        try:
            model = ClassifierModel(args.references, args.threshold, args.offset)
        except ValueError as exc:
            raise CLIError(str(exc)) from None
    else:
        raise CLIError("give --model or --references")
    res = classify_tissue(args.phase, model)
    print(res.label + (f" ({', '.join(res.candidates)})" if res.label == "ambiguous" else ""))
    for k, v in sorted(res.distances.items(), key=lambda kv: kv[1]):
        print(f"  {k}: {v:.2f} deg")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="capsule-em", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    p.add_argument("--seed", type=int, default=0,
                   help="recorded in manifests; all computations are deterministic")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one configured scene")
    s.add_argument("config")
    s.add_argument("-o", "--out", default="run")
    s.add_argument("--f-rad", type=float, default=None, help="radiation frequency (Hz), default excitation centre")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--dump-grid", action="store_true", help="also write the binary grid dump")
    s.add_argument("--plot", action="store_true", help="render PNG figures next to the CSVs")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("metrics", help="sensing metrics from ST/SI/LI sweep CSVs")
    m.add_argument("--st", required=True)
    m.add_argument("--si", required=True)
    m.add_argument("--li", required=True)
    m.add_argument("--antenna", default="")
    m.add_argument("-o", "--out", default="metrics")
    m.add_argument("--f-phase", type=float, default=434e6)
    m.add_argument("--threshold", type=float, default=-10.0, help="matching threshold (dB)")
    m.add_argument("--fc-method", choices=("argmin", "midband"), default="argmin")
    m.add_argument("--plot", action="store_true")
    m.set_defaults(func=cmd_metrics)

    t = sub.add_parser("table", help="recompute derived cells of the shipped sensing table")
    t.add_argument("-o", "--out", default=None, help="CSV path")
    t.set_defaults(func=cmd_table)

    w = sub.add_parser("sweep", help="shell-thickness or frequency sweep")
    w.add_argument("kind", choices=("thickness", "frequency"))
    w.add_argument("config")
    w.add_argument("-o", "--out", default="sweep")
    w.add_argument("--t", type=_floats, default=None, help="thicknesses (mm), default from [sweep]")
    w.add_argument("--f", type=float, default=434e6, help="evaluation frequency of the thickness sweep (Hz)")
    w.add_argument("--f-list", type=_floats, default=None, help="frequencies (Hz), default from [sweep]")
    w.add_argument("--workers", type=int, default=None, help="concurrent runs")
    w.add_argument("--plot", action="store_true")
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="evaluate an analytic reference")
    osub = o.add_subparsers(dest="kind", required=True)
    om = osub.add_parser("mie")
    om.add_argument("--radius-mm", type=float, default=50.0)
    om.add_argument("--eps-r", type=float, default=63.0)
    om.add_argument("--sigma", type=float, default=1.02)
    om.add_argument("--f", type=float, default=434e6)
    om.add_argument("-o", "--out", default=None, help="JSON path")
    op = osub.add_parser("planewave")
    op.add_argument("--eps-r", type=float, default=67.2)
    op.add_argument("--sigma", type=float, default=1.01)
    op.add_argument("--f", type=float, default=434e6)
    op.add_argument("-o", "--out", default=None, help="JSON path")
    ob = osub.add_parser("bound")
    ob.add_argument("--material", default="GI_avg")
    ob.add_argument("--f-list", type=_floats, default=[403e6, 434e6, 868e6, 915e6, 1400e6, 2450e6])
    ob.add_argument("--geometry", type=float, nargs=4, metavar=("L", "RC", "T", "RP"),
                    default=[20.0, 6.0, 0.2, 50.0], help="source length, radius, insulation, phantom radius (mm)")
    ob.add_argument("-o", "--out", default=None, help="CSV path")
    ob.add_argument("--plot", action="store_true")
    oc = osub.add_parser("circuit")
    oc.add_argument("--R", type=float, default=50.0)
    oc.add_argument("--L", type=float, default=0.0)
    oc.add_argument("--C", type=float, default=math.inf)
    oc.add_argument("--z0", type=float, default=50.0)
    oc.add_argument("--f-start", type=float, default=380e6)
    oc.add_argument("--f-stop", type=float, default=480e6)
    oc.add_argument("--n", type=int, default=11)
    oc.add_argument("-o", "--out", default=None, help="sweep CSV path")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("classify", help="label a 434 MHz phase by nearest reference")
    c.add_argument("phase", type=float, help="degrees")
    c.add_argument("--model", default=None, help="classifier JSON")
    c.add_argument("--references", type=_references, default=None, help="e.g. ST=-64.5,SI=20.1,LI=-74.4")
    c.add_argument("--threshold", type=float, default=10.0)
    c.add_argument("--offset", type=float, default=0.0)
    c.set_defaults(func=cmd_classify)
    return p


def main(argv=None) -> int:
    from .solver.config import ConfigError

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
