"""Command-line front end.

Subcommands::

    resonance  lattice resonant sets for one phase, compared with the collinear oracle
    nullcheck  non-resonance verdict for a symbol against a phase
    probe      empirical bilinear operator-norm ratios
    propagate  free half-wave decay of a Gaussian
    simulate   quadratic system from a run config
    fit        log-log decay fit of a JSON-lines series
    report     aggregate simulation outputs into tables and a summary

Every command assembles its configuration from defaults, an optional
``--config`` JSON file and command-line flags (in increasing precedence),
validates it against the published schema, writes the validated config to
``<out>/<command>_config.json`` and then runs.  The output directory
defaults to ``$SPACETIME_RESONANCE_OUT`` or ``./out``.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np

from . import spectral
from .evolve import (
    NormReport,
    NumericalFailure,
    Simulation,
    SystemSpec,
    _REPORT_KEYS,
    decay_fit,
    initial_state,
    linear_decay_series,
    make_initial_data,
    scattering_diagnostic,
)
from .phase import Phase, XNormParams, symbol_from_json
from .pseudoproduct import BudgetExceededError, bilinear_bound_probe
from .resonance import NullCheckConfig, compare_with_oracle, null_condition_check, resonance_masks
from .schemas import validate

OUT_ENV = "SPACETIME_RESONANCE_OUT"
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
_SIGNED_FLAGS = ("--signs", "--case")

DEFAULTS = {
    "resonance": {
        "phase": {"signs": [1, 1], "speeds": [1.0, 1.0, 1.0]},
        "xi": [1.0, 0.0, 0.0],
        "grid": {"d": 3, "N": 64, "L": 16 * math.pi},
        "tol": 1.2,
        "mode": "cells",
    },
    "nullcheck": {
        "symbol": {"kind": "Q0"},
        "phase": {"signs": [-1, 1], "speeds": [1.0, 1.0, 1.0]},
        "d": 3,
        "samples_per_shell": 512,
        "shells": 8,
        "bulk_samples": 4096,
        "seed": 0,
    },
    "probe": {
        "symbol": {"kind": "const", "value": 1.0},
        "p": 4.0,
        "q": 4.0,
        "r": 2.0,
        "smoothing": 0.0,
        "trials": 100,
        "N_list": [8, 16, 32],
        "d": 3,
        "L": 16 * math.pi,
        "rank": 16,
        "seed": 0,
    },
    "propagate": {
        "grid": {"d": 3, "N": 128, "L": 100.0},
        "width": 0.7,
        "speed": 1.0,
        "times": [round(float(t), 10) for t in np.geomspace(1.0, 20.0, 25)],
        "window": [2.0, 20.0],
    },
    "simulate": {
        "integrator": {"dt": 0.1, "rank": 16},
        "reports": {"every": 1.0},
    },
    "fit": {"key": "linf", "window": [2.0, 20.0]},
    "report": {},
}


class ValidationFailure(Exception):
    """A configuration or input problem (exit code 2)."""


# ---------------------------------------------------------------------------
# Configuration assembly


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _set(cfg: dict, path: str, value) -> None:
    if value is None:
        return
    *parents, leaf = path.split(".")
    for p in parents:
        cfg = cfg.setdefault(p, {})
    cfg[leaf] = value


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    return [int(x) for x in _floats(text)]


def _signs(text: str) -> list[int]:
    """Parse a sign pair written ``+-`` (or ``pm``, the form used internally after flag joining)."""
    text = text.translate(str.maketrans("pm", "+-"))
    if len(text) != 2 or any(c not in "+-" for c in text):
        raise argparse.ArgumentTypeError(f"signs must be two characters from '+-', got {text!r}")
    return [1 if c == "+" else -1 for c in text]


def _load_file(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ValidationFailure(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationFailure(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationFailure(f"config file {path} must contain a JSON object")
    return data


def _symbol_flags(args) -> dict | None:
    if args.symbol is None and args.expr is None:
        return None
    kind = "expr" if args.expr is not None and args.symbol in (None, "expr") else args.symbol
    sym: dict = {"kind": kind}
    if kind in ("Q0", "Q0i", "Qij"):
        sym["signs"] = args.symbol_signs or args.signs or [1, 1]
        if args.i is not None:
            sym["i"] = args.i
        if args.j is not None:
            sym["j"] = args.j
    elif kind == "expr":
        sym["expr"] = args.expr
    elif kind == "const" and args.value is not None:
        sym["value"] = args.value
    elif kind == "inverse":
        sym["axis"] = args.axis or "eta"
    elif kind == "phase_over_eta":
        sym["signs"] = args.symbol_signs or args.signs or [-1, 1]
    return sym


def build_config(command: str, args) -> dict:
    """Defaults < config file < flags, validated against the command schema."""
    cfg = _merge(DEFAULTS[command], _load_file(getattr(args, "config", None)))
    if command == "resonance":
        _set(cfg, "phase.signs", args.case)
        _set(cfg, "phase.speeds", args.speeds)
        if args.xi is not None:
            cfg["xi"] = args.xi
            cfg["grid"]["d"] = len(args.xi)
        _set(cfg, "grid.N", args.N)
        _set(cfg, "grid.L", args.L)
        _set(cfg, "tol", args.tol)
        _set(cfg, "mode", args.mode)
    elif command in ("nullcheck", "probe"):
        sym = _symbol_flags(args)
        if sym is not None:
            cfg["symbol"] = sym
        _set(cfg, "d", args.d)
        _set(cfg, "seed", args.seed)
        if command == "nullcheck":
            _set(cfg, "phase.signs", args.signs)
            _set(cfg, "phase.speeds", args.speeds)
            _set(cfg, "samples_per_shell", args.samples)
            if cfg["symbol"].get("kind") in ("Q0", "Q0i", "Qij", "phase_over_eta") and "signs" not in cfg["symbol"]:
                cfg["symbol"]["signs"] = list(cfg["phase"]["signs"])
        else:
            for key in ("p", "q", "r", "smoothing", "trials", "rank", "L"):
                _set(cfg, key, getattr(args, key))
            _set(cfg, "N_list", args.N_list)
    elif command == "propagate":
        _set(cfg, "grid.d", args.d)
        _set(cfg, "grid.N", args.N)
        _set(cfg, "grid.L", args.L)
        _set(cfg, "width", args.width)
        _set(cfg, "speed", args.speed)
        _set(cfg, "window", args.window)
        if args.t_end is not None:
            cfg["times"] = [round(float(t), 10) for t in np.geomspace(1.0, args.t_end, args.samples)]
    elif command == "simulate":
        if args.config is None:
            raise ValidationFailure("simulate needs --config (run configs carry the mandatory seed)")
        _set(cfg, "seed", args.seed)
        _set(cfg, "integrator.dt", args.dt)
        _set(cfg, "integrator.t_end", args.t_end)
        _set(cfg, "grid.N", args.N)
    elif command == "fit":
        _set(cfg, "input", args.input)
        _set(cfg, "key", args.key)
        _set(cfg, "window", args.window)
    elif command == "report":
        if args.runs:
            cfg["runs"] = args.runs
        _set(cfg, "keys", args.keys)
        _set(cfg, "window", args.window)
    validate(command, cfg)
    return cfg


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=1, sort_keys=True, allow_nan=False) + "\n")


def _echo_config(out: Path, command: str, cfg: dict) -> None:
    _write_json(out / f"{command}_config.json", cfg)


# ---------------------------------------------------------------------------
# Commands


def cmd_resonance(cfg: dict, out: Path) -> dict:
    grid = spectral.make_grid(cfg["grid"]["d"], cfg["grid"]["N"], cfg["grid"]["L"])
    phi = Phase.from_json(cfg["phase"])
    mask = resonance_masks(phi, cfg["xi"], grid, cfg["tol"], cfg["mode"])
    for name in ("time", "space", "spacetime", "axis"):
        np.save(out / f"mask_{name}.npy", getattr(mask, name))
    summary = {"phase": phi.to_json(), "case": phi.signs, "xi": list(map(float, cfg["xi"])), "counts": mask.counts()}
    if phi.equal_speeds:
        summary["oracle"] = compare_with_oracle(mask).to_json()
    _write_json(out / "resonance_summary.json", summary)
    return summary


def cmd_nullcheck(cfg: dict, out: Path) -> dict:
    q = symbol_from_json(cfg["symbol"], cfg["d"])
    phi = Phase.from_json(cfg["phase"])
    conf = NullCheckConfig(cfg["d"], cfg["samples_per_shell"], cfg["shells"], cfg["bulk_samples"], seed=cfg["seed"])
    report = null_condition_check(q, phi, conf).to_json()
    _write_json(out / "nullcheck.json", report)
    return report


def cmd_probe(cfg: dict, out: Path) -> dict:
    m = symbol_from_json(cfg["symbol"], cfg["d"])
    stats = bilinear_bound_probe(
        m, cfg["p"], cfg["q"], cfg["r"], cfg["trials"], tuple(cfg["N_list"]), cfg["d"], cfg["L"], cfg["seed"], cfg["rank"], cfg["smoothing"]
    )
    (out / "probe.csv").write_text(stats.to_csv())
    summary = {
        "symbol": stats.symbol,
        "exponents": [stats.p, stats.q, stats.r],
        "max_by_N": {str(k): v for k, v in sorted(stats.max_by_N.items())},
        "max_ratio": stats.max_ratio,
        "slope": stats.slope,
    }
    _write_json(out / "probe_summary.json", summary)
    return summary


def _fit_row(label: str, key: str, pts, window, horizon) -> dict:
    row = {"run": label, "key": key, "window_start": window[0], "window_end": window[1], "horizon": horizon}
    try:
        slope, err = decay_fit(pts, key, tuple(window), horizon)
        row.update(slope=slope, stderr=err, status="ok")
    except ValueError as exc:
        row.update(slope=None, stderr=None, status=str(exc))
    return row


_FIT_FIELDS = ["run", "key", "slope", "stderr", "window_start", "window_end", "horizon", "status"]


def _fit_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, _FIT_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in r.items()})  # None -> empty cell
    return buf.getvalue()


def cmd_propagate(cfg: dict, out: Path) -> dict:
    g = cfg["grid"]
    grid = spectral.make_grid(g["d"], g["N"], g["L"])
    u0 = spectral.gaussian(grid, cfg["width"])
    series = linear_decay_series(u0, cfg["times"], cfg["speed"])
    with open(out / "linear.jsonl", "w") as fh:
        for t, linf, l2 in series:
            fh.write(json.dumps({"t": t, "linf": linf, "l2": l2}) + "\n")
    row = _fit_row("linear", "linf", [(t, v) for t, v, _ in series], cfg["window"], grid.horizon)
    (out / "decay_fit.csv").write_text(_fit_csv([row]))
    l2 = [x for _, _, x in series]
    summary = {"slope": row["slope"], "stderr": row["stderr"], "status": row["status"], "l2_drift": max(l2) - min(l2), "horizon": grid.horizon}
    _write_json(out / "propagate_summary.json", summary)
    return summary


def _report_times(rep: dict, t_end: float) -> list[float]:
    if rep.get("times"):
        return sorted(float(t) for t in rep["times"] if t <= t_end)
    every = rep.get("every", 1.0)
    n = int(math.floor((t_end - 1.0) / every + 1e-9))
    return [round(1.0 + i * every, 12) for i in range(n + 1)]


def _report_line(r: NormReport, keys: Sequence[str] | None) -> str:
    data = r.to_json()
    if keys:
        data = {"t": data["t"], **{k: data[k] for k in keys}}
    return json.dumps(data, allow_nan=False)


def cmd_simulate(cfg: dict, out: Path) -> dict:
    g = cfg["grid"]
    grid = spectral.make_grid(g["d"], g["N"], g["L"])
    system = SystemSpec.from_json(cfg["system"], g["d"])
    integ, rep = cfg["integrator"], cfg["reports"]
    keys = rep.get("keys")
    known = set(_REPORT_KEYS) | {"xnorm", "horizon"}
    if keys and not set(keys) <= known:
        raise ValidationFailure(f"unknown report keys {sorted(set(keys) - known)}; known keys: {sorted(known)}")
    params = XNormParams(**cfg.get("xnorm", {}))
    data = [make_initial_data(grid, system.initial, cfg["seed"] + l) for l in range(len(system.components))]
    state = initial_state(system, data)
    sim = Simulation(system, grid, integ.get("rank", 16))
    times = _report_times(rep, integ["t_end"])
    checkpoints = sorted(float(t) for t in rep.get("checkpoints", []) if t <= integ["t_end"])
    ckdir = out / "checkpoints"
    ckdir.mkdir(exist_ok=True)
    norms = open(out / "norms.jsonl", "w")
    collected: list[NormReport] = []

    def on_report(r: NormReport) -> None:
        collected.append(r)
        norms.write(_report_line(r, keys) + "\n")
        norms.flush()

    try:
        state, reports, kept = sim.run(state, integ["t_end"], integ["dt"], times, params, checkpoints, on_report)
    except NumericalFailure as exc:
        spectral.save_snapshot(ckdir / "last_good", exc.last_good.profiles[0], exc.last_good.t)
        raise
    finally:
        norms.close()
    for t, st in sorted(kept.items()):
        for l, f in enumerate(st.profiles):
            spectral.save_snapshot(ckdir / f"profile{l}_t{t:g}", f, t)
    window = rep.get("window", [2.0, min(integ["t_end"], 0.999 * grid.horizon)])
    rows = [_fit_row("simulate", k, collected, window, grid.horizon) for k in ("linf", "riesz_inf")]
    (out / "decay_fit.csv").write_text(_fit_csv(rows))
    summary = {
        "t_end": state.t,
        "steps": state.steps,
        "fits": {r["key"]: {"slope": r["slope"], "stderr": r["stderr"], "status": r["status"]} for r in rows},
        "sup_t_linf": max((r.t_linf for r in collected), default=None),
        "scattering_differences": scattering_diagnostic([kept[t] for t in sorted(kept)]) if len(kept) > 1 else [],
        "checkpoint_times": sorted(kept),
        "horizon": grid.horizon,
    }
    _write_json(out / "summary.json", summary)
    return summary


def _read_series(path: Path) -> list[dict]:
    rows = []
    with open(path) as fh:
        for i, line in enumerate(fh, 1):
            if line.strip():
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ValidationFailure(f"{path}:{i}: not a JSON line ({exc})") from exc
    return rows


def _series_points(rows: list[dict], key: str, source: str) -> list[tuple[float, float]]:
    missing = [i for i, r in enumerate(rows) if key not in r or "t" not in r]
    if missing:
        raise KeyError(f"series key {key!r} missing from {source} (first bad line {missing[0] + 1})")
    return [(float(r["t"]), float(r[key])) for r in rows]


def cmd_fit(cfg: dict, out: Path) -> dict:
    path = Path(cfg["input"])
    if not path.is_file():
        raise ValidationFailure(f"input series not found: {path}")
    rows = _read_series(path)
    pts = _series_points(rows, cfg["key"], str(path))
    horizon = rows[0].get("horizon") if rows else None
    row = _fit_row(path.stem, cfg["key"], pts, cfg["window"], horizon)
    (out / "fit.csv").write_text(_fit_csv([row]))
    return row


EXPECTED_RUN_FILES = ("norms.jsonl", "summary.json", "simulate_config.json")


def emit_report(run_dirs: Sequence[str | Path], out: str | Path, keys: Sequence[str] | None = None, window: Sequence[float] | None = None) -> dict:
    """Aggregate simulation outputs into decay tables, plot-ready CSV and a summary.

    Writes ``decay_table.csv`` (slope per run and key), ``series.csv`` (long
    format ``run,t,key,value``), ``t_linf_side_by_side.csv`` (one column of
    ``t ||u||_inf`` per run) and ``summary.md``.  Raises
    :class:`FileNotFoundError` listing the expected files when no run
    directory holds a ``norms.jsonl`` series, and :class:`KeyError` when a
    requested key is missing from a series.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    for d in run_dirs:
        d = Path(d)
        if (d / "norms.jsonl").is_file():
            runs.append(d)
    if not runs:
        raise FileNotFoundError(
            "no run artifacts found in " + (", ".join(map(str, run_dirs)) or "(no directories given)")
            + "; each run directory must contain " + ", ".join(EXPECTED_RUN_FILES[:1])
            + " (and optionally " + ", ".join(EXPECTED_RUN_FILES[1:]) + ")"
        )
    labels, seen = [], {}
    for d in runs:
        name = d.name or str(d)
        seen[name] = seen.get(name, 0) + 1
        labels.append(name if seen[name] == 1 else f"{name}#{seen[name]}")
    table, long_rows, side = [], [], {}
    for label, d in zip(labels, runs):
        rows = _read_series(d / "norms.jsonl")
        if not rows:
            raise KeyError(f"series in {d / 'norms.jsonl'} is empty")
        present = [k for k in rows[0] if k not in ("t", "horizon")]
        use = list(keys) if keys else present
        horizon = rows[0].get("horizon")
        ts = [float(r["t"]) for r in rows]
        win = list(window) if window else [2.0, max(ts)]
        if horizon is not None and win[1] >= horizon:
            win[1] = 0.999 * horizon
        for k in use:
            pts = _series_points(rows, k, str(d / "norms.jsonl"))
            table.append(_fit_row(label, k, pts, win, horizon))
            long_rows.extend((label, t, k, v) for t, v in pts)
        if "linf" in rows[0]:
            side[label] = {float(r["t"]): float(r["t"]) * float(r["linf"]) for r in rows}
    (out / "decay_table.csv").write_text(_fit_csv(table))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "t", "key", "value"])
    w.writerows((r, f"{t:.17g}", k, f"{v:.17g}") for r, t, k, v in long_rows)
    (out / "series.csv").write_text(buf.getvalue())
    common = sorted(set.intersection(*(set(s) for s in side.values()))) if side else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"t_linf[{lab}]" for lab in side])
    w.writerows([f"{t:.17g}"] + [f"{side[lab][t]:.17g}" for lab in side] for t in common)
    (out / "t_linf_side_by_side.csv").write_text(buf.getvalue())
    (out / "summary.md").write_text(_summary_markdown(table, side, common, runs, labels))
    return {"runs": labels, "decay_table": table, "side_by_side_times": common}


def _verdict(row: dict) -> str:
    if row["status"] != "ok":
        return "no fit"
    s = row["slope"]
    if abs(s + 1) <= 0.1:
        return "consistent with t^-1"
    return "faster than t^-1" if s < -1 else "slower than t^-1"


def _summary_markdown(table, side, common, runs, labels) -> str:
    lines = ["# Run report", "", "## Decay fits (log-log slope in the window)", ""]
    lines.append("| run | key | slope | stderr | window | horizon | verdict |")
    lines.append("|---|---|---|---|---|---|---|")
    for r in table:
        slope = f"{r['slope']:.3f}" if r["status"] == "ok" else "n/a"
        err = f"{r['stderr']:.3f}" if r["status"] == "ok" else "n/a"
        hz = "n/a" if r["horizon"] is None else f"{r['horizon']:.4g}"
        lines.append(f"| {r['run']} | {r['key']} | {slope} | {err} | [{r['window_start']:g}, {r['window_end']:g}] | {hz} | {_verdict(r)} |")
    notes = [r for r in table if r["status"] != "ok"]
    if notes:
        lines += ["", "Fits not performed:", ""] + [f"- {r['run']}/{r['key']}: {r['status']}" for r in notes]
    for label, d in zip(labels, runs):
        sp = d / "summary.json"
        if sp.is_file():
            s = json.loads(sp.read_text())
            diffs = s.get("scattering_differences") or []
            if diffs:
                mono = all(b < a for a, b in zip(diffs, diffs[1:]))
                lines += ["", f"Scattering differences for {label}: " + ", ".join(f"{x:.3e}" for x in diffs) + (" (decreasing)" if mono else " (not decreasing)")]
    if len(side) > 1 and common:
        names = list(side)
        lines += ["", "## t ||u||_inf side by side", "", "| t | " + " | ".join(names) + " |", "|---" * (len(names) + 1) + "|"]
        for t in common:
            lines.append(f"| {t:g} | " + " | ".join(f"{side[n][t]:.4e}" for n in names) + " |")
    return "\n".join(lines) + "\n"


def cmd_report(cfg: dict, out: Path) -> dict:
    return emit_report(cfg["runs"], out, cfg.get("keys"), cfg.get("window"))


COMMANDS = {
    "resonance": cmd_resonance,
    "nullcheck": cmd_nullcheck,
    "probe": cmd_probe,
    "propagate": cmd_propagate,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "report": cmd_report,
}


# ---------------------------------------------------------------------------
# Parser


def _symbol_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--symbol", choices=["Q0", "Q0i", "Qij", "expr", "const", "smooth", "phase_over_eta", "inverse"])
    p.add_argument("--symbol-signs", type=_signs, help="sign pair of a null-form symbol (defaults to --signs)")
    p.add_argument("--i", type=int, help="first null-form index (1-based)")
    p.add_argument("--j", type=int, help="second null-form index (1-based)")
    p.add_argument("--expr", help="symbol expression over abs_xi, abs_eta, abs_xi_eta, xi_dot_eta, xi1.., eta1..")
    p.add_argument("--value", type=float, help="value of a constant symbol")
    p.add_argument("--axis", choices=["xi", "eta", "xi-eta"], help="axis of an inverse-norm symbol")
    p.add_argument("--d", type=int, choices=[2, 3])
    p.add_argument("--seed", type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spacetime-resonance", description=__doc__.split("\n\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    common.add_argument("--threads", type=int, help="cap on FFT worker threads")
    common.add_argument("--config", help="JSON config file (flags override it)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resonance", parents=[common], help="lattice resonant sets and oracle agreement")
    p.add_argument("--case", type=_signs, help="sign pair, e.g. ++ or -+")
    p.add_argument("--speeds", type=_floats, help="c0,c1,c2")
    p.add_argument("--xi", type=_floats, help="output frequency, e.g. 1,0,0")
    p.add_argument("--N", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--mode", choices=["cells", "absolute"])

    p = sub.add_parser("nullcheck", parents=[common], help="non-resonance verdict")
    _symbol_args(p)
    p.add_argument("--signs", type=_signs, help="phase sign pair, e.g. -+")
    p.add_argument("--speeds", type=_floats)
    p.add_argument("--samples", type=int, help="samples per shell")

    p = sub.add_parser("probe", parents=[common], help="bilinear operator-norm probe")
    _symbol_args(p)
    p.add_argument("--signs", type=_signs, help="sign pair of a null-form symbol")
    for k in ("p", "q", "r", "smoothing", "L"):
        p.add_argument(f"--{k}", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--N-list", dest="N_list", type=_ints)

    p = sub.add_parser("propagate", parents=[common], help="free half-wave decay")
    p.add_argument("--d", type=int, choices=[2, 3])
    p.add_argument("--N", type=int)
    p.add_argument("--L", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--speed", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--samples", type=int, default=25)
    p.add_argument("--window", type=_floats)

    p = sub.add_parser("simulate", parents=[common], help="run a quadratic system from a config")
    p.add_argument("--seed", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--N", type=int)

    p = sub.add_parser("fit", parents=[common], help="decay fit of a JSON-lines series")
    p.add_argument("--input")
    p.add_argument("--key")
    p.add_argument("--window", type=_floats)

    p = sub.add_parser("report", parents=[common], help="aggregate run outputs")
    p.add_argument("runs", nargs="*", help="run directories")
    p.add_argument("--keys", type=lambda s: [k for k in s.split(",") if k])
    p.add_argument("--window", type=_floats)
    return parser


def _join_signed(argv: Sequence[str]) -> list[str]:
    """Attach values such as ``-+`` to their flag so argparse does not read them as options.

    The signs are spelled ``p``/``m`` because argparse drops a bare ``--`` value.
    """
    out, it = [], iter(argv)
    for a in it:
        flag, eq, val = a.partition("=")
        if flag in _SIGNED_FLAGS:
            nxt = val if eq else next(it, None)
            out.append(a if nxt is None else f"{flag}={nxt.translate(str.maketrans('+-', 'pm'))}")
        else:
            out.append(a)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    """Execute one command; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = make_parser()
    try:
        args = parser.parse_args(_join_signed(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    if args.threads is not None:
        spectral.set_workers(args.threads)
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    try:
        cfg = build_config(args.command, args)
        out.mkdir(parents=True, exist_ok=True)
        _echo_config(out, args.command, cfg)
        result = COMMANDS[args.command](cfg, out)
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "(root)"
        print(f"invalid {args.command} config at {where}: {exc.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValidationFailure, ValueError, KeyError, FileNotFoundError, BudgetExceededError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    json.dump(result, sys.stdout, indent=1, sort_keys=True, default=str, allow_nan=False)
    sys.stdout.write("\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())
