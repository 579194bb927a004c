"""Run directories: integrate a config, analyse the trace, write artifacts.

Layout of a run directory::

    config.yaml          resolved configuration (re-runnable)
    manifest.json        config digest, versions, stop reason
    trace.csv            t, dt, uR, vR, umax, vmax per accepted step
    snapshots/snap_<k>.csv   r, u, v
    report.json          every analysis and barrier check
"""
from __future__ import annotations

import csv
import json
import logging
import math
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (NoBlowupError, WindowTooShortError, check_monotonicity,
                       check_ratio_bound, estimate_blowup_set, estimate_blowup_time,
                       fit_rate_exponent, ratio_constant, upper_rate_constant)
from .barriers import (BarrierParams, check_barrier_dominates, evaluate_J1_J2,
                       evaluate_J_ratio, max_B_admissible, min_B_for_supersolution,
                       smallest_sufficient_B, supersolution_residual)
from .config import RunConfig, dump_config
from .model import check_small_lambda_condition, validate_compatibility, validate_lower_bound_condition
from .solver import integrate

log = logging.getLogger(__name__)

FMT = "%.17g"
TRACE_COLUMNS = ("t", "dt", "uR", "vR", "umax", "vmax")


def _fmt(x) -> str:
    return FMT % x


class CsvTraceWriter:
    """Streams trace rows and snapshots to disk as the integration proceeds."""

    def __init__(self, run_dir: Path, grid):
        self.run_dir = Path(run_dir)
        self.r = grid.r
        (self.run_dir / "snapshots").mkdir(parents=True, exist_ok=True)
        self._fh = open(self.run_dir / "trace.csv", "w", newline="")
        self._fh.write(",".join(TRACE_COLUMNS) + "\n")
        self._pending = []

    def on_step(self, row):
        self._pending.append(",".join(_fmt(x) for x in row))
        if len(self._pending) >= 4096:
            self.flush()

    def on_snapshot(self, k, state):
        self.flush()
        with open(self.run_dir / "snapshots" / f"snap_{k:05d}.csv", "w", newline="") as fh:
            fh.write(f"# t={_fmt(state.t)}\n")
            fh.write("r,u,v\n")
            for r, u, v in zip(self.r, state.u, state.v):
                fh.write(f"{_fmt(r)},{_fmt(u)},{_fmt(v)}\n")

    def flush(self):
        if self._pending:
            self._fh.write("\n".join(self._pending) + "\n")
            self._pending.clear()
            self._fh.flush()

    def close(self):
        self.flush()
        self._fh.close()


def read_trace_csv(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.asarray(rows[1:], dtype=float)
    return {name: body[:, k] for k, name in enumerate(header)}


def _versions() -> dict:
    import numba
    return {"blowup_lab": __version__, "numpy": np.__version__, "numba": numba.__version__,
            "python": platform.python_version()}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def analyse(cfg: RunConfig, spec, grid, trace) -> dict:
    """Every check the run supports, as a JSON-ready dict."""
    report = {
        "stop_reason": trace.stop_reason,
        "steps": trace.steps,
        "t_final": float(trace.t[-1]),
        "compatibility": validate_compatibility(spec.u0, spec.v0, spec, grid).to_dict(),
        "lower_rate_condition": validate_lower_bound_condition(spec.u0, spec.v0, spec, grid).to_dict(),
        "monotonicity": check_monotonicity(trace).to_dict() if len(trace.snapshots) >= 2 else None,
        "ratio": check_ratio_bound(trace, spec).to_dict(),
    }
    M = ratio_constant(spec, grid)
    report["ratio_functional"] = evaluate_J_ratio(trace, M, grid).to_dict()
    j1, j2 = evaluate_J1_J2(trace, grid)
    report["gradient_functionals"] = {"J1": j1.to_dict(), "J2": j2.to_dict()}

    report["blowup_detected"] = False
    report["T"] = report["alpha_u"] = report["alpha_v"] = None
    report["upper_rate_constant"] = report["small_lambda"] = None
    report["notes"] = []
    try:
        est = estimate_blowup_time(trace, cfg.analysis.beta)
    except (NoBlowupError, WindowTooShortError) as exc:
        report["notes"].append(f"blow-up not detected: {exc}")
        est = None
    if est is not None:
        report["blowup_detected"] = True
        report["T"] = est.to_dict()
        for which in ("u", "v"):
            try:
                report[f"alpha_{which}"] = fit_rate_exponent(trace, est.T, which).to_dict()
            except WindowTooShortError as exc:
                report["notes"].append(f"rate fit for {which}: {exc}")
        C = upper_rate_constant(trace, est.T)
        report["upper_rate_constant"] = C
        report["small_lambda"] = check_small_lambda_condition(spec, C, est.T).to_dict()
    elif cfg.C_est is not None and cfg.T_est is not None:
        report["small_lambda"] = check_small_lambda_condition(spec, cfg.C_est, cfg.T_est).to_dict()

    A_set = spec.lam
    if cfg.barrier is not None and cfg.barrier.A != "auto":
        A_set = float(cfg.barrier.A)
    report["blowup_set"] = estimate_blowup_set(trace, A_set, cfg.sample_radii()).to_dict()
    report["barrier"] = _barrier_section(cfg, spec, grid, trace, est, report)
    return _jsonable(report)


def _barrier_section(cfg, spec, grid, trace, est, report):
    if cfg.barrier is None:
        return {"evaluated": False, "reason": "no barrier options in config"}
    if est is None:
        return {"evaluated": False, "reason": "blow-up time unavailable"}
    A = spec.lam if cfg.barrier.A == "auto" else float(cfg.barrier.A)
    B_lo = min_B_for_supersolution(A, spec.R, spec.n)
    B_hi = max_B_admissible(report["upper_rate_constant"], est.T, spec.n, spec.R,
                            spec.u0.sup_norm(), spec.v0.sup_norm())
    section = {"evaluated": True, "A": A, "B_min": B_lo, "B_max_admissible": B_hi,
               "T": est.T}
    if cfg.barrier.B == "auto":
        if B_lo > B_hi:
            return {**section, "evaluated": False,
                    "reason": "admissible B interval is empty (small-λ condition fails)"}
        B = 0.5 * (B_lo + B_hi)
    else:
        B = float(cfg.barrier.B)
    params = BarrierParams(A, B, est.T, spec.n, spec.R)
    section["B"] = B
    section["dominates"] = check_barrier_dominates(trace, params, grid).to_dict()
    times = [s.t for s in trace.snapshots]
    section["min_residual"] = min(float(supersolution_residual(params, grid, t).values.min())
                                  for t in times)
    section["smallest_sufficient_B"] = smallest_sufficient_B(A, spec.R, spec.n, est.T)
    return section


def execute(cfg: RunConfig, run_dir) -> dict:
    """Integrate, analyse and write a run directory. Returns the report."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    spec, grid = cfg.spec(), cfg.grid()
    dump_config(cfg, run_dir / "config.yaml")
    writer = CsvTraceWriter(run_dir, grid)
    manifest = {"config_sha256": cfg.digest(), "versions": _versions(), "status": "running"}
    _write_json(run_dir / "manifest.json", manifest)
    try:
        trace = integrate(spec, grid, cfg.controls, observer=writer)
    except Exception as exc:
        manifest.update(status="failed", error=str(exc))
        state = getattr(exc, "state", None)
        if state is not None:
            manifest["diagnostic_state"] = _jsonable(state.dump())
        _write_json(run_dir / "manifest.json", manifest)
        raise
    finally:
        writer.close()
    report = analyse(cfg, spec, grid, trace)
    _write_json(run_dir / "report.json", report)
    manifest.update(status="completed", stop_reason=trace.stop_reason, steps=trace.steps,
                    snapshots=len(trace.snapshots))
    _write_json(run_dir / "manifest.json", manifest)
    return report


def _write_json(path, obj):
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, ensure_ascii=False) + "\n")


def headline(report: dict) -> dict:
    def alpha(key):
        fit = report.get(key)
        return None if fit is None else fit["alpha"]

    T = report.get("T")
    return {"T": None if T is None else T["T"], "alpha_u": alpha("alpha_u"),
            "alpha_v": alpha("alpha_v"),
            "interior_bounded": report["blowup_set"]["interior_bounded"]}
