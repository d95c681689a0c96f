"""Command-line entry point.

Usage: ``qfi-twoqubit COMMAND [--flag value ...]``. Values may also come from
a ``key = value`` file passed with ``--config``; flags override the file.
Exit codes: 0 success, 1 invalid input or I/O error, 2 failed verification.
"""

import argparse
import math
import sys

import numpy as np

from . import __version__
from .entanglement import concurrence, concurrence_initial
from .experiments import (
    find_peak,
    gamma_tm_scan,
    local_maxima,
    max_qfi_vs_a,
    normalize_quantity,
    oscillation_frequency,
    coupling_from_frequency,
    sweep_time,
)
from .model import (
    DEFAULT_DT,
    InitialStateParams,
    ModelParams,
    analytic_state,
    build_initial_state,
    evolve_numeric,
)
from .qfi import SUPPORT_CUTOFF, qcr_bound, qfi_gamma_closed, qfi_v_closed
from .serialize import csv_text, json_text, series_csv, write_atomic

COMMANDS = ("evolve", "qfi-gamma", "qfi-v", "sweep", "peaks", "scan-gamma-tm",
            "max-vs-a", "frequency", "concurrence", "verify")

DEFAULTS = {
    "a": None,  # 0.5 for decay-rate commands, 0.8 for coupling commands
    "chi": 0.5,
    "gamma": 0.1,
    "gamma_a": None,
    "gamma_b": None,
    "v": 0.2,
    "t": 5.0,
    "t_max": None,
    "n_points": 2000,
    "quantity": "f_gamma",
    "m": 1,
    "gammas": "0.05,0.1,0.2,0.3,0.5",
    "a_grid": "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1",
    "dt": DEFAULT_DT,
    "tol": None,
    "fd_step": None,
    "cutoff": SUPPORT_CUTOFF,
    "out": None,
    "format": None,
}

FLOAT_KEYS = {"a", "chi", "gamma", "gamma_a", "gamma_b", "v", "t", "t_max", "dt", "tol", "fd_step", "cutoff"}
INT_KEYS = {"n_points", "m"}
TABLE_COMMANDS = {"sweep", "max-vs-a", "scan-gamma-tm"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser():
    ap = _Parser(prog="qfi-twoqubit", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="key = value file; flags take precedence")
    for key in DEFAULTS:
        ap.add_argument("--" + key.replace("_", "-"), dest=key, default=argparse.SUPPRESS)
    ap.add_argument("--version", action="version", version=__version__)
    return ap


def read_config_file(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep:
                raise UsageError(f"{path}:{n}: expected key = value")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{n}: unknown key {key!r}")
            out[key] = value.strip()
    return out


def _convert(key, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if key in FLOAT_KEYS:
            x = float(value)
            if not math.isfinite(x):
                raise ValueError
            return x
        if key in INT_KEYS:
            return int(value)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {value!r} as a number") from None
    return value


def resolve_config(argv):
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    cfg = dict(DEFAULTS)
    config_path = ns.pop("config", None)
    if config_path:
        try:
            cfg.update(read_config_file(config_path))
        except OSError as exc:
            raise UsageError(f"config: {exc}") from None
    cfg.update(ns)
    cfg = {k: _convert(k, v) for k, v in cfg.items()}
    if cfg["a"] is None:
        uses_coupling = command in ("qfi-v", "frequency") or (
            command in ("sweep", "peaks", "max-vs-a") and normalize_quantity(cfg["quantity"]) == "f_v")
        cfg["a"] = 0.8 if uses_coupling else 0.5
    if cfg["format"] is None:
        cfg["format"] = "csv" if command in TABLE_COMMANDS else "json"
    if cfg["format"] not in ("csv", "json"):
        raise UsageError(f"format: must be csv or json, got {cfg['format']!r}")
    cfg["command"] = command
    return cfg


def _floats(key, text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{key}: expected a comma-separated list of numbers, got {text!r}") from None


def _provenance(cfg):
    return {
        "version": __version__,
        "tolerances": {"dt": cfg["dt"], "tol": cfg["tol"], "fd_step": cfg["fd_step"], "cutoff": cfg["cutoff"]},
    }


def _record_csv(results, meta):
    keys = [k for k, v in results.items() if np.isscalar(v)]
    return csv_text(keys, [[results[k] for k in keys]], meta)


def _physical(cfg):
    return {k: cfg[k] for k in ("a", "chi", "gamma", "v")}


def _state_dict(rho):
    return {"re": np.real(rho).tolist(), "im": np.imag(rho).tolist()}


def cmd_evolve(cfg):
    ga = cfg["gamma"] if cfg["gamma_a"] is None else cfg["gamma_a"]
    gb = cfg["gamma"] if cfg["gamma_b"] is None else cfg["gamma_b"]
    p = InitialStateParams(cfg["a"], cfg["chi"])
    mp = ModelParams(cfg["v"], ga, gb)
    rho = evolve_numeric(build_initial_state(p), mp, cfg["t"], dt=cfg["dt"], tol=cfg["tol"])
    results = {"t": cfg["t"], "gamma_a": ga, "gamma_b": gb, "rho": _state_dict(rho),
               "trace": float(np.trace(rho).real)}
    if ga == gb:
        ana = analytic_state(p, ga, cfg["v"], cfg["t"])
        results["rho_closed_form"] = _state_dict(ana)
        results["max_abs_deviation"] = float(np.max(np.abs(rho - ana)))
    if cfg["format"] == "csv":
        rows = [[i + 1, j + 1, rho[i, j].real, rho[i, j].imag] for i in range(4) for j in range(4)]
        return csv_text(("row", "col", "re", "im"), rows, {**_physical(cfg), "t": cfg["t"]}), results
    return None, results


def cmd_qfi_gamma(cfg):
    f = qfi_gamma_closed(cfg["a"], cfg["gamma"], cfg["t"])
    res = {"f_gamma": f, "qcr_bound_m1": qcr_bound(f, 1) if f > 0 else math.inf}
    if cfg["m"] != 1:
        res["m"] = cfg["m"]
        res["qcr_bound"] = qcr_bound(f, cfg["m"]) if f > 0 else math.inf
    return None, res


def cmd_qfi_v(cfg):
    f = qfi_v_closed(cfg["a"], cfg["chi"], cfg["gamma"], cfg["v"], cfg["t"])
    res = {"f_v": f, "qcr_bound_m1": qcr_bound(f, 1) if f > 0 else math.inf}
    if cfg["m"] != 1:
        res["m"] = cfg["m"]
        res["qcr_bound"] = qcr_bound(f, cfg["m"]) if f > 0 else math.inf
    return None, res


def _sweep(cfg):
    return sweep_time(cfg["quantity"], cfg["a"], cfg["chi"], cfg["gamma"], cfg["v"],
                      cfg["t_max"], cfg["n_points"])


def cmd_sweep(cfg):
    series = _sweep(cfg)
    results = {"times": series.times, "values": series.values, "meta": series.meta}
    return (series_csv(series) if cfg["format"] == "csv" else None), results


def cmd_peaks(cfg):
    series = _sweep(cfg)
    peak = find_peak(series)
    res = {"t_peak": peak.t_peak, "value_peak": peak.value_peak,
           "refinement_width": peak.refinement_width, "n_local_maxima": len(local_maxima(series))}
    return None, res


def cmd_scan(cfg):
    scan = gamma_tm_scan(cfg["a"], _floats("gammas", cfg["gammas"]), cfg["n_points"])
    meta = {"a": cfg["a"], "slope": scan.slope, "intercept": scan.intercept, "r2": scan.r2, "cv": scan.cv}
    rows = zip(scan.gammas, scan.t_peaks, scan.products)
    res = {**meta, "gammas": scan.gammas, "t_peaks": scan.t_peaks, "gamma_t_peak": scan.products}
    text = csv_text(("gamma", "t_peak", "gamma_t_peak"), rows, meta) if cfg["format"] == "csv" else None
    return text, res


def cmd_max_vs_a(cfg):
    curve = max_qfi_vs_a(cfg["quantity"], _floats("a_grid", cfg["a_grid"]), cfg["chi"], cfg["gamma"],
                         cfg["v"], cfg["t_max"], cfg["n_points"])
    meta = {"quantity": curve.quantity, "chi": cfg["chi"], "gamma": cfg["gamma"], "v": cfg["v"],
            "concurrence_display_scale": curve.display_scale}
    res = {**meta, "a": curve.a, "max_value": curve.max_values, "t_peak": curve.t_peaks,
           "concurrence": curve.concurrence}
    rows = zip(curve.a, curve.max_values, curve.t_peaks, curve.concurrence)
    text = csv_text(("a", "max_value", "t_peak", "concurrence"), rows, meta) if cfg["format"] == "csv" else None
    return text, res


def cmd_frequency(cfg):
    series = sweep_time("f_v", cfg["a"], cfg["chi"], cfg["gamma"], cfg["v"], cfg["t_max"], cfg["n_points"])
    f = oscillation_frequency(series)
    v_hat = coupling_from_frequency(f)
    return None, {"frequency": f, "v_estimate": v_hat, "v": cfg["v"],
                  "relative_error": abs(v_hat - cfg["v"]) / abs(cfg["v"]) if cfg["v"] else None}


def cmd_concurrence(cfg):
    p = InitialStateParams(cfg["a"], cfg["chi"])
    rho = analytic_state(p, cfg["gamma"], cfg["v"], cfg["t"])
    return None, {"t": cfg["t"], "concurrence": concurrence(rho), "concurrence_initial": concurrence_initial(cfg["a"])}


def cmd_verify(cfg):
    from .verification import run_all

    report = run_all(dt=cfg["dt"], fd_step=cfg["fd_step"], cutoff=cfg["cutoff"])
    print(report.table(), file=sys.stderr)
    res = {
        "passed": report.passed,
        "checks": [vars(c) for c in report.checks],
        "findings": report.findings,
    }
    return None, res


HANDLERS = {
    "evolve": cmd_evolve, "qfi-gamma": cmd_qfi_gamma, "qfi-v": cmd_qfi_v, "sweep": cmd_sweep,
    "peaks": cmd_peaks, "scan-gamma-tm": cmd_scan, "max-vs-a": cmd_max_vs_a,
    "frequency": cmd_frequency, "concurrence": cmd_concurrence, "verify": cmd_verify,
}


def run(argv=None):
    """Execute one command; returns the process exit status."""
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
        command = cfg["command"]
        text, results = HANDLERS[command](cfg)
        if text is None:
            if cfg["format"] == "csv":
                text = _record_csv(results, _physical(cfg))
            else:
                config = {k: v for k, v in cfg.items() if k not in ("out", "format")}
                text = json_text(config, results, _provenance(cfg))
        if cfg["out"]:
            write_atomic(cfg["out"], text)
        else:
            sys.stdout.write(text)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    if command == "verify" and not results["passed"]:
        return 2
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
