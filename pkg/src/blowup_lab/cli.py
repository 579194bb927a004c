"""Command-line front end: ``validate``, ``run``, ``sweep`` and ``report``.

Exit codes: 0 success, 1 failed hypothesis check (validate) or solver error
(run), 2 malformed input, 3 unwritable output directory.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import ConfigError, apply_override, load_config, load_yaml, parse_config
from .grid import RadialGrid
from .model import (NoCompatibleProfileError, check_small_lambda_condition,
                    validate_compatibility, validate_lower_bound_condition)
from .runs import execute, headline

OUT_ENV = "BLOWUP_LAB_OUT"
EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT, EXIT_UNWRITABLE = 0, 1, 2, 3

log = logging.getLogger("blowup_lab")


def _print_report(report, out=None):
    out = out or sys.stdout
    status = "PASS" if report.satisfied else "FAIL"
    print(f"[{status}] {report.name}", file=out)
    for e in report.entries:
        mark = "ok " if e.satisfied else ("!! " if e.critical else "-- ")
        print(f"   {mark}{e.id:22s} margin={e.margin: .6g}  at r={e.location:.6g}"
              f"  {e.description}", file=out)


def cmd_validate(config_path) -> int:
    try:
        cfg = load_config(config_path)
        spec = cfg.spec()
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except NoCompatibleProfileError as exc:
        print(f"initial data: {exc}", file=sys.stderr)
        return EXIT_FAIL
    grid = RadialGrid(spec.R, cfg.J)
    compat = validate_compatibility(spec.u0, spec.v0, spec, grid)
    lower = validate_lower_bound_condition(spec.u0, spec.v0, spec, grid)
    _print_report(compat)
    _print_report(lower)
    if cfg.C_est is not None and cfg.T_est is not None:
        ff = check_small_lambda_condition(spec, cfg.C_est, cfg.T_est)
        print(f"[{'PASS' if ff.satisfied else 'FAIL'}] small-lambda  lhs={ff.lhs:.6g} "
              f"rhs={ff.rhs:.6g}  lambda_max={ff.lambda_max_admissible:.6g}")
    else:
        print("[----] small-lambda  not evaluated (needs small_lambda.C_est and T_est)")
    # the lower-rate and small-λ conditions gate later checks, not whether the problem is posed
    return EXIT_OK if compat.satisfied else EXIT_FAIL


def _resolve_out(cfg, config_path, out):
    if out:
        return Path(out)
    if cfg.output_dir:
        return Path(cfg.output_dir)
    root = Path(os.environ.get(OUT_ENV, "runs"))
    return root / Path(config_path).stem


def _prepare_dir(path) -> bool:
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-test"
        probe.write_text("")
        probe.unlink()
        return True
    except OSError as exc:
        print(f"error: cannot write to {path}: {exc}", file=sys.stderr)
        return False


def cmd_run(config_path, out=None) -> int:
    try:
        cfg = load_config(config_path)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except NoCompatibleProfileError as exc:
        print(f"initial data: {exc}", file=sys.stderr)
        return EXIT_FAIL
    run_dir = _resolve_out(cfg, config_path, out)
    if not _prepare_dir(run_dir):
        return EXIT_UNWRITABLE
    try:
        report = execute(cfg, run_dir)
    except Exception as exc:  # noqa: BLE001 - any solver failure is an operational error
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    h = headline(report)
    print(f"{run_dir}: stop={report['stop_reason']} T={h['T']} "
          f"alpha_u={h['alpha_u']} alpha_v={h['alpha_v']} "
          f"interior_bounded={h['interior_bounded']}")
    return EXIT_OK


def _sweep_entry(args):
    run_id, base, overrides, run_dir = args
    raw = base
    entry = {"id": run_id, "overrides": overrides, "status": "failed",
             "T": None, "alpha_u": None, "alpha_v": None, "interior_bounded": None}
    try:
        for key, value in overrides.items():
            raw = apply_override(raw, key, value)
        cfg = parse_config(raw)
        report = execute(cfg, run_dir)
    except Exception as exc:  # noqa: BLE001 - recorded per entry, other runs continue
        entry["error"] = f"{type(exc).__name__}: {exc}"
        return entry
    entry.update(status="completed", **headline(report))
    return entry


def load_sweep(path):
    raw = load_yaml(path)
    unknown = set(raw) - {"base", "parameters", "workers", "output"}
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    base = raw.get("base")
    if isinstance(base, str):
        base = load_yaml(Path(path).parent / base)
    if not isinstance(base, dict):
        raise ConfigError("base", "expected a mapping or a path to a config file")
    params = raw.get("parameters")
    if not isinstance(params, dict):
        raise ConfigError("parameters", "expected a mapping of key -> list of values")
    for key, values in params.items():
        if not isinstance(values, list):
            raise ConfigError(f"parameters.{key}", "expected a list of values")
    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers", "expected a positive integer")
    out = (raw.get("output") or {}).get("dir")
    return base, params, workers, out


def cmd_sweep(sweep_path, out=None) -> int:
    try:
        base, params, workers, out_cfg = load_sweep(sweep_path)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ConfigError as exc:
        print(f"sweep config error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    keys = list(params)
    combos = list(itertools.product(*(params[k] for k in keys)))
    if not keys or not combos:
        print("sweep config error: empty parameter product", file=sys.stderr)
        return EXIT_BAD_INPUT
    root = Path(out or out_cfg or Path(os.environ.get(OUT_ENV, "runs")) / Path(sweep_path).stem)
    if not _prepare_dir(root):
        return EXIT_UNWRITABLE
    jobs = []
    for k, combo in enumerate(combos):
        run_id = f"run_{k:04d}"
        overrides = dict(zip(keys, combo))
        raw = dict(base)
        raw.pop("output", None)
        jobs.append((run_id, raw, overrides, str(root / run_id)))
    if workers == 1:
        entries = [_sweep_entry(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_sweep_entry, jobs))
    (root / "index.json").write_text(json.dumps(entries, indent=2) + "\n")
    with open(root / "index.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "overrides", "status", "T", "alpha_u", "alpha_v", "interior_bounded"])
        for e in entries:
            w.writerow([e["id"], json.dumps(e["overrides"], sort_keys=True), e["status"],
                        *("" if e[k] is None else repr(e[k])
                          for k in ("T", "alpha_u", "alpha_v", "interior_bounded"))])
    done = sum(e["status"] == "completed" for e in entries)
    print(f"{root}: {done}/{len(entries)} runs completed")
    return EXIT_OK


def _row(label, status, detail):
    return f"{label:42s} {status:14s} {detail}"


def report_rows(report: dict) -> list:
    """(label, status, detail) per claim checked in a run."""
    rows = []
    mono = report.get("monotonicity")
    if mono is None:
        rows.append(("radial/temporal monotonicity", "not evaluated", "fewer than 2 snapshots"))
    else:
        worst = min(mono["entries"], key=lambda e: e["margin"])
        rows.append(("radial/temporal monotonicity", "pass" if mono["satisfied"] else "FAIL",
                     f"worst {worst['id']} margin {worst['margin']:.3g}"))
    ratio = report["ratio"]
    rows.append(("ratio bound e^v <= M e^u, e^u <= M e^v", "pass" if ratio["satisfied"] else "FAIL",
                 f"M={ratio['M_used']:.6g} max e^(v-u)={ratio['max_exp_v_minus_u']:.6g} "
                 f"max e^(u-v)={ratio['max_exp_u_minus_v']:.6g}"))
    grads = report["gradient_functionals"]
    ok = grads["J1"]["satisfied"] and grads["J2"]["satisfied"]
    rows.append(("gradient functionals u_r - (r/R)e^v", "pass" if ok else "FAIL",
                 f"min J1={grads['J1']['min']:.3g} J2={grads['J2']['min']:.3g}"))
    fits = [report.get("alpha_u"), report.get("alpha_v")]
    if not report.get("blowup_detected") or None in fits:
        rows.append(("lower rate window (alpha >= 1/2)", "not evaluated", "no rate fit"))
        rows.append(("upper rate window (alpha <= 1)", "not evaluated", "no rate fit"))
    else:
        a = [f["alpha"] for f in fits]
        detail = f"alpha_u={a[0]:.4f} alpha_v={a[1]:.4f} (slack 0.1)"
        rows.append(("lower rate window (alpha >= 1/2)",
                     "pass" if min(a) >= 0.4 else "FAIL", detail))
        rows.append(("upper rate window (alpha <= 1)",
                     "pass" if max(a) <= 1.1 else "FAIL", detail))
    ff = report.get("small_lambda")
    if ff is None:
        rows.append(("small-lambda condition", "not evaluated", "needs C and T estimates"))
    else:
        rows.append(("small-lambda condition", "holds" if ff["satisfied"] else "does not hold",
                     f"lhs={ff['lhs']:.4g} rhs={ff['rhs']:.4g}"))
    bs = report["blowup_set"]
    worst = min(bs["table"], key=lambda row: row["bound"] - max(row["sup_u"], row["sup_v"]))
    rows.append(("interior bound (boundary-only blow-up)",
                 "pass" if bs["interior_bounded"] else "FAIL",
                 f"A={bs['A']:.4g}, tightest at r={worst['r']:.3g}: "
                 f"sup={max(worst['sup_u'], worst['sup_v']):.4g} <= {worst['bound']:.4g}"))
    barrier = report.get("barrier") or {}
    if not barrier.get("evaluated"):
        rows.append(("supersolution dominates u, v", "not evaluated",
                     barrier.get("reason", "")))
    else:
        dom = barrier["dominates"]
        rows.append(("supersolution dominates u, v", "pass" if dom["satisfied"] else "FAIL",
                     f"min(z-u, z-v)={dom['min']:.4g} with A={barrier['A']:.4g} "
                     f"B={barrier['B']:.4g}"))
    return rows


def cmd_report(run_dir) -> int:
    path = Path(run_dir) / "report.json"
    try:
        report = json.loads(path.read_text())
    except FileNotFoundError:
        print(f"error: no report.json in {run_dir}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except json.JSONDecodeError as exc:
        print(f"error: {path} is not valid JSON (line {exc.lineno}, column {exc.colno}: "
              f"{exc.msg})", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        rows = report_rows(report)
    except (KeyError, TypeError) as exc:
        print(f"error: {path} is missing expected content ({exc})", file=sys.stderr)
        return EXIT_BAD_INPUT
    T = report.get("T")
    print(f"run: {run_dir}")
    print(f"stop reason: {report['stop_reason']}  steps: {report['steps']}  "
          f"T estimate: {'n/a' if T is None else format(T['T'], '.10g')}")
    print(_row("claim", "outcome", "detail"))
    print("-" * 100)
    for label, status, detail in rows:
        print(_row(label, status, detail))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="blowup-lab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("validate", help="check initial data against the hypotheses")
    s.add_argument("config")
    s = sub.add_parser("run", help="integrate to blow-up and write a run directory")
    s.add_argument("config")
    s.add_argument("--out", help=f"run directory (default ${OUT_ENV}/<config stem>)")
    s = sub.add_parser("sweep", help="run the cartesian product of parameter lists")
    s.add_argument("sweep_config")
    s.add_argument("--out")
    s = sub.add_parser("report", help="summarize a completed run")
    s.add_argument("run_dir")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "validate":
        return cmd_validate(args.config)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "sweep":
        return cmd_sweep(args.sweep_config, args.out)
    return cmd_report(args.run_dir)


if __name__ == "__main__":
    sys.exit(main())
