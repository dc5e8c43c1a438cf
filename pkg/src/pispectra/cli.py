"""Command line entry point: ``pispectra {eig,locus,bode,sim,net}``.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dynamics import (
    Ramp,
    SignalSpec,
    Tone,
    frequency_response,
    harmonic_amplitude,
    simulate,
    steady_state_window,
    thd,
)
from .line import (
    ConfigError,
    closed_loop_model,
    load_config,
    section_params,
    write_matrix_csv,
)
from .network import assemble, energize, load_network, wscc9_spec
from .oracle import NumericalError, compare, numeric_spectrum
from .spectrum import analytic_spectrum

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

GAIN_FIELDS = {"kv": "kv_b", "ki": "ki_b", "kx": "kx_b"}


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_table(out: Path, stem: str, header, rows, fmt: str) -> Path:
    if fmt == "json":
        path = out / f"{stem}.json"
        data = [list(row) for row in rows]
        _write_json(path, {"columns": list(header), "rows": data})
        return path
    path = out / f"{stem}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if not np.isfinite(obj) else float(obj)
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2) + "\n")


def _load(args):
    if not args.config:
        raise ConfigError("--config is required")
    line, n, gains = load_config(args.config)
    return section_params(line, n), n, gains


def _sweep_values(lo: float, hi: float, points: int, scale: str) -> np.ndarray:
    if points < 2:
        raise ConfigError("a sweep needs --points >= 2")
    if not lo < hi:
        raise ConfigError("sweep requires --min < --max")
    if scale == "log":
        if lo <= 0:
            raise ConfigError("log sweep requires --min > 0")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


# -- subcommands ------------------------------------------------------------

def cmd_eig(args) -> int:
    sec, n, gains = _load(args)
    model = closed_loop_model(sec, n, gains)
    analytic = analytic_spectrum(sec, n, gains)
    numeric = numeric_spectrum(model)
    report = compare(analytic, numeric)
    out = args.out
    if args.format == "json":
        (out / "analytic_spectrum.json").write_text(analytic.to_json() + "\n")
        (out / "oracle_spectrum.json").write_text(numeric.to_json() + "\n")
    else:
        analytic.write_csv(out / "analytic_spectrum.csv")
        numeric.write_csv(out / "oracle_spectrum.csv")
        write_matrix_csv(out / "A.csv", model.A)
        write_matrix_csv(out / "B.csv", model.B)
    (out / "oracle_report.json").write_text(report.to_json() + "\n")
    print(f"{len(analytic)} eigenvalues ({analytic.method}), max_rel_error={report.max_rel_error:.3e}")
    return 0


def cmd_locus(args) -> int:
    sec, n, gains = _load(args)
    values = _sweep_values(args.min, args.max, args.points, args.scale)
    field = GAIN_FIELDS[args.gain]

    def point(g):
        return analytic_spectrum(sec, n, replace(gains, **{field: float(g)}))

    with ThreadPoolExecutor() as pool:
        spectra = list(pool.map(point, values))
    rows = []
    for g, spec in zip(values, spectra):
        for m in sorted(spec.modes, key=lambda m: (abs(m.k), -m.k, -m.lam.real)):
            rows.append((float(g), m.k, m.lam.real, m.lam.imag))
    path = write_table(args.out, "locus", (args.gain, "k", "re_lambda", "im_lambda"), rows, args.format)
    print(f"{len(values)} gain values -> {path}")
    return 0


def cmd_bode(args) -> int:
    sec, n, gains = _load(args)
    model = closed_loop_model(sec, n, gains)
    inp = {"v_a": 0, "v_b": 1, "a": 0, "b": 1}.get(args.input)
    if inp is None:
        raise ConfigError(f"unknown input {args.input!r}; use v_a or v_b")
    if args.output not in model.state_labels:
        raise ConfigError(f"unknown output state {args.output!r}")
    grid = _sweep_values(args.wmin, args.wmax, args.points, "log")
    fr = frequency_response(model, inp, args.output, grid)
    rows = zip(fr.omega, fr.magnitude, fr.magnitude_db, fr.phase)
    path = write_table(args.out, "bode", ("omega", "magnitude", "magnitude_db", "phase"), rows, args.format)
    print(f"|H| at lowest frequency: {fr.magnitude[0]:.6g} ({fr.magnitude_db[0]:.3f} dB) -> {path}")
    return 0


def _parse_harmonic(text: str):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"--harmonic expects FREQ:AMP[:a|b], got {text!r}")
    where = parts[2] if len(parts) == 3 else "b"
    if where not in ("a", "b"):
        raise ConfigError(f"harmonic source must be a or b, got {where!r}")
    return float(parts[0]), float(parts[1]), where


def _parse_ramp(text: str | None):
    if not text:
        return None
    try:
        start, dur = (float(p) for p in text.split(":"))
    except ValueError:
        raise ConfigError(f"--ramp expects START:DURATION, got {text!r}") from None
    return Ramp(start, dur)


def cmd_sim(args) -> int:
    sec, n, gains = _load(args)
    model = closed_loop_model(sec, n, gains)
    if args.probe not in model.state_labels:
        raise ConfigError(f"unknown probe state {args.probe!r}")
    ramp = _parse_ramp(args.ramp)
    comps = {"a": [Tone(1.0, args.fundamental)], "b": [Tone(1.0, args.fundamental)]}
    harmonics = [_parse_harmonic(h) for h in args.harmonic]
    for f, amp, where in harmonics:
        comps[where].append(Tone(amp, f))
    signals = [SignalSpec(tuple(comps["a"]), ramp), SignalSpec(tuple(comps["b"]), ramp)]
    result = simulate(model, signals, args.t_end, args.dt)
    settle = ramp.t_start + ramp.t_ramp if ramp else 0.0
    window = steady_state_window(args.t_end, args.fundamental, sec.L / sec.R if sec.R > 0 else 0.0, settle)
    probe = result.state(args.probe)
    cols = ["t"] + list(result.state_labels)
    write_table(args.out, "sim", cols, (tuple(r) for r in np.column_stack([result.t, result.x])), args.format)
    summary = {
        "probe": args.probe,
        "window": list(window),
        "thd": thd(result, args.probe, args.fundamental, window),
        "harmonics": {
            repr(f): harmonic_amplitude(result, args.probe, f, window, args.fundamental) for f, _, _ in harmonics
        },
        "peak": float(np.max(np.abs(probe))),
        "gains": gains.as_dict(),
    }
    _write_json(args.out / "thd.json", summary)
    print(f"THD({args.probe}) = {summary['thd']:.6g} over {window}")
    return 0


def cmd_net(args) -> int:
    spec = load_network(args.spec) if args.spec else wscc9_spec()
    if args.kv is not None or args.ki is not None:
        spec = spec.with_gains(args.kv or 0.0, args.ki or 0.0)
    am = assemble(spec)
    result = energize(am, args.t_end, args.dt)
    buses = am.bus_voltages(result)
    currents = am.branch_currents(result)
    write_table(args.out, "bus_voltages", ["t"] + [f"v[{b}]" for b in spec.buses],
                (tuple(r) for r in np.column_stack([result.t, buses])), args.format)
    write_table(args.out, "branch_currents", ["t"] + [f"i[{b.name}]" for b in spec.branches],
                (tuple(r) for r in np.column_stack([result.t, currents])), args.format)
    src = spec.sources[0]
    f0 = src.signal.components[0].frequency if src.signal and src.signal.components else 50.0
    settle = src.signal.ramp.t_start + src.signal.ramp.t_ramp if src.signal and src.signal.ramp else 0.0
    sec0 = section_params(spec.branches[0].line, spec.branches[0].n_sections)
    tau = sec0.L / sec0.R if sec0.R > 0 else 0.0
    window = steady_state_window(args.t_end, f0, tau, settle)
    i_src = am.source_current(result)
    tail = (result.t >= window[0] - 1e-12)
    summary = {
        "states": am.model.dim,
        "window": list(window),
        "source_current_rms": float(np.sqrt(np.mean(i_src[tail] ** 2))),
        "source_current_peak": float(np.max(np.abs(i_src))),
        "sources": [{"bus": s.bus, "kv": s.kv, "ki": s.ki} for s in spec.sources],
    }
    _write_json(args.out / "summary.json", summary)
    print(f"{am.model.dim} states, steady-state source current RMS {summary['source_current_rms']:.6g}")
    return 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="line configuration file (key = value)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="pispectra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("eig", parents=[common], help="analytic and oracle spectra")
    s.set_defaults(func=cmd_eig)

    s = sub.add_parser("locus", parents=[common], help="root locus over one gain")
    s.add_argument("--gain", choices=sorted(GAIN_FIELDS), required=True)
    s.add_argument("--min", type=float, required=True)
    s.add_argument("--max", type=float, required=True)
    s.add_argument("--points", type=int, default=50)
    s.add_argument("--scale", choices=("lin", "log"), default="lin")
    s.set_defaults(func=cmd_locus)

    s = sub.add_parser("bode", parents=[common], help="frequency response source -> state")
    s.add_argument("--input", default="v_b")
    s.add_argument("--output", default="v_3")
    s.add_argument("--wmin", type=float, default=1.0)
    s.add_argument("--wmax", type=float, default=1e5)
    s.add_argument("--points", type=int, default=2000)
    s.set_defaults(func=cmd_bode)

    s = sub.add_parser("sim", parents=[common], help="time-domain run with harmonic injection")
    s.add_argument("--t-end", type=float, default=0.6)
    s.add_argument("--dt", type=float, default=1e-5)
    s.add_argument("--fundamental", type=float, default=50.0)
    s.add_argument("--harmonic", action="append", default=[], metavar="FREQ:AMP[:a|b]")
    s.add_argument("--ramp", metavar="START:DURATION")
    s.add_argument("--probe", default="v_3")
    s.set_defaults(func=cmd_sim)

    s = sub.add_parser("net", parents=[common], help="network energization")
    s.add_argument("--spec", type=Path, help="network JSON (default: shipped WSCC 9-bus)")
    s.add_argument("--kv", type=float)
    s.add_argument("--ki", type=float)
    s.add_argument("--t-end", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=2e-5)
    s.set_defaults(func=cmd_net)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
