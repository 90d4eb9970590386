"""Command-line front door: metric tables, single solves, scans, verification.

Every command is deterministic: the same flags produce byte-identical output
files (floats are written with 17 significant digits, and nothing in the
package draws random numbers).  Exit codes: 0 success, 1 verification or
region-agreement failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import analysis, metrics, verify
from .instanton_systems import integrate_fg, integrate_full
from .integrator import StepControl
from .invariant_calculus import DomainError, hitchin_residual
from .moduli_scan import Axis, ScanSpec, frontier, scan
from .singular_ivp import seed_for_model

_FMT = "%.17g"


def _fmt(x) -> str:
    return _FMT % float(x)


def _parse_range(text: str, default_n: int = 100):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"range {text!r} is not LO:HI or LO:HI:N")
    lo, hi = float(parts[0]), float(parts[1])
    n = int(parts[2]) if len(parts) == 3 else default_n
    if not (hi > lo and n >= 2):
        raise ValueError(f"range {text!r} must have HI > LO and N >= 2")
    return lo, hi, n


def _load_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"config line {line!r} is not key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset (None) options from the config file; explicit flags win."""
    if getattr(args, "config", None) is None:
        return
    cfg = _load_config(args.config)
    for key, val in cfg.items():
        if getattr(args, key, None) is None and hasattr(args, key):
            setattr(args, key, val)


def _outdir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


# ---------------------------------------------------------------------------


def cmd_metric(args) -> int:
    _merge_config(args)
    model = args.model.upper()
    try:
        lo, hi, n = _parse_range(args.r, default_n=100)
        r_min = metrics.r_domain_min(model)
        if lo < r_min:
            raise ValueError(f"r range starts below the domain minimum {r_min}")
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    rs = np.linspace(lo, hi, n)
    profs = [metrics.profile(model, float(r)) for r in rs]
    resid = [hitchin_residual(p).total for p in profs]
    path = os.path.join(_outdir(args), f"metric_{model.lower()}.csv")
    metrics.write_profile_csv(path, profs, extra_columns={"hitchin_residual": resid})
    print(f"wrote {path} ({n} rows; max residual {max(resid):.3e})")
    return 0


def _write_trajectory_csv(path, traj) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("param",) + tuple(traj.names or
                                      tuple(f"y{i}" for i in range(traj.states.shape[1]))))
        for p, row in zip(traj.params, traj.states):
            w.writerow([_fmt(p)] + [_fmt(v) for v in row])


def cmd_solve(args) -> int:
    _merge_config(args)
    model = args.model.upper()
    bundle = args.bundle.lower()
    out = _outdir(args)
    horizon = float(args.horizon) if args.horizon is not None else 500.0
    payload = {"schema_version": 1, "model": model, "bundle": bundle}

    if bundle == "p1":
        if args.x1 is not None:  # triply symmetric shortcut on the conical profile
            f1 = g1 = float(args.x1)
            payload["x1"] = f1
        elif args.f1 is not None and args.g1 is not None:
            f1, g1 = float(args.f1), float(args.g1)
            payload.update(f1=f1, g1=g1)
        else:
            print("usage error: p1 needs --f1 and --g1 (or --x1)", file=sys.stderr)
            return 2
        traj = integrate_fg(model, 2 * f1, 2 * g1, horizon,
                            StepControl(max_step=1.0), with_t=True,
                            detect=(g1 != 0.0))
        report = analysis.curvature_report_fg(traj, model)
        verdict = analysis.classify(traj, report, alc_certificate=(model == "BGGG"))
        payload["verdict"] = verdict.tag
        payload["evidence"] = {k: v for k, v in verdict.evidence.items()}
        payload["sup_F_A"] = report.sup_norm
        if report.decay_exponent is not None:
            payload["curvature_decay_exponent"] = report.decay_exponent
        if verdict.tag == "GlobalBoundedCurvature" and g1 != 0.0:
            try:
                f_inf, angle = analysis.holonomy_infinity(traj)
                payload["F_inf"] = f_inf
                payload["holonomy_angle"] = angle
            except DomainError:
                pass
        _write_trajectory_csv(os.path.join(out, "trajectory.csv"), traj)
    elif bundle == "pid":
        b0 = args.y0 if args.y0 is not None else args.b0
        if b0 is None:
            print("usage error: pid needs --y0 (or --b0)", file=sys.stderr)
            return 2
        b0 = float(b0)
        payload["b0_minus"] = b0
        sd = seed_for_model(model, "Pid", b0=b0)
        cmap = metrics.coordinate_map(model)
        traj = integrate_full(model, sd.t_start, cmap.r_of_t(sd.t_start),
                              sd.state_at(sd.t_start), min(horizon, 20.0),
                              StepControl(max_step=0.5))
        if traj.stop.kind == "FiniteBlowUp":
            verdict = analysis.Verdict("FiniteBlowUp", {"blowup_t": traj.stop.value})
        elif traj.stop.kind == "ReachedEnd" and np.max(np.abs(traj.final_state[1:])) < 1e3:
            verdict = analysis.Verdict("GlobalBoundedCurvature",
                                       {"state_end": [float(v) for v in traj.final_state]})
        else:
            verdict = analysis.Verdict("Inconclusive", {"stop": str(traj.stop)})
        payload["verdict"] = verdict.tag
        payload["evidence"] = verdict.evidence
        _write_trajectory_csv(os.path.join(out, "trajectory.csv"), traj)
    else:
        print(f"usage error: unknown bundle {bundle!r}", file=sys.stderr)
        return 2

    path = os.path.join(out, "verdict.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
    print(f"wrote {path}: {payload['verdict']}")
    return 0


def cmd_scan(args) -> int:
    _merge_config(args)
    model = args.model.upper()
    bundle = args.bundle.capitalize() if args.bundle else "P1"
    out = _outdir(args)
    horizon = float(args.horizon) if args.horizon is not None else (
        500.0 if bundle == "P1" else 20.0)
    try:
        if bundle == "P1":
            lo1, hi1, n1 = _parse_range(args.f1_range or "0:3:60")
            lo2, hi2, n2 = _parse_range(args.g1_range or "0:1.5:30")
            spec = ScanSpec(model, "P1", (Axis("f1", lo1, hi1, n1),
                                          Axis("g1", lo2, hi2, n2)), horizon)
        else:
            lo, hi, n = _parse_range(args.y0_range or "-2:2:41")
            spec = ScanSpec(model, "Pid", (Axis("y0", lo, hi, n),), horizon)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    workers = int(args.workers) if args.workers is not None else os.cpu_count()
    result = scan(spec, workers=workers)
    poly = None
    if args.frontier and bundle == "P1":
        poly = frontier(result)
    result.to_csv(os.path.join(out, "scan.csv"))
    result.to_json(os.path.join(out, "scan.json"), frontier_polyline=poly)
    if args.heatmap:
        result.write_heatmap(os.path.join(out, "scan_heatmap.dat"))
    print(f"scan: {result.counts()}; disagreements: {len(result.disagreements)}")
    return 1 if result.disagreements else 0


def cmd_verify(args) -> int:
    _merge_config(args)
    name = args.suite
    options = {}
    if args.x1 is not None and name == "energy":
        options["x1"] = float(args.x1)
    try:
        rows = verify.run_suite(name, **options)
    except KeyError:
        print(f"usage error: unknown suite {name!r}; choose from {', '.join(verify.SUITES)}",
              file=sys.stderr)
        return 2
    width = max(len(r[0]) for r in rows)
    ok_all = True
    for label, ok, detail in rows:
        ok_all &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] {label:<{width}}  {detail}")
    print(f"{sum(1 for r in rows if r[1])}/{len(rows)} checks passed")
    return 0 if ok_all else 1


def cmd_bubble(args) -> int:
    _merge_config(args)
    out = _outdir(args)
    x1s = [float(v) for v in (args.x1 or "1e2,1e3,1e4,1e5").split(",")]
    lams = [float(v) for v in (args.lam or "0.05,0.1,0.15,0.2").split(",")]
    c, resid, rows = analysis.bubbling_grid_fit(x1s, lams)
    path = os.path.join(out, "bubble.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("lam", "x1", "sup_norm", "lam^2_over_x1"))
        for lam, x1, sup, ref in rows:
            w.writerow([_fmt(lam), _fmt(x1), _fmt(sup), _fmt(ref)])
    with open(os.path.join(out, "bubble.json"), "w") as fh:
        json.dump({"schema_version": 1, "fitted_c": c, "relative_residual": resid},
                  fh, indent=2, sort_keys=True)
    print(f"wrote {path}; fitted c = {c:.6g}, relative residual {resid:.3%}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="g2inst",
        description="Invariant-calculus and instanton ODE toolkit for the two "
                    "explicit cohomogeneity-one special-holonomy profiles on R4 x S3.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=None, help="output directory (default: .)")
        sp.add_argument("--config", default=None,
                        help="flat key=value file merged under explicit flags")
        sp.add_argument("--format", default=None, choices=("csv", "json"),
                        help="preferred tabular format (csv is always written)")

    sp = sub.add_parser("metric", help="profile tables with evolution residuals")
    sp.add_argument("--model", required=True, choices=("bs", "bggg"),
                    help="bs: asymptotically conical profile (r >= 1); "
                         "bggg: asymptotically locally conical profile (r >= 9/4)")
    sp.add_argument("--r", required=True,
                    help="radial sample range LO:HI[:N] in the model coordinate")
    common(sp)
    sp.set_defaults(fn=cmd_metric)

    sp = sub.add_parser("solve", help="seed -> integrate -> classify one solution")
    sp.add_argument("--model", required=True, choices=("bs", "bggg"))
    sp.add_argument("--bundle", required=True, choices=("p1", "pid"),
                    help="homogeneous extension over the singular orbit")
    sp.add_argument("--f1", default=None,
                    help="slope of f+ at the orbit (p1 seeds)")
    sp.add_argument("--g1", default=None,
                    help="slope of g+ at the orbit (p1 seeds)")
    sp.add_argument("--x1", default=None,
                    help="triply symmetric shortcut: f1 = g1 = x1 (conical model)")
    sp.add_argument("--y0", default=None,
                    help="orbit value of the minus coefficients (pid seeds, conical)")
    sp.add_argument("--b0", default=None,
                    help="orbit value of the minus coefficients (pid seeds, general)")
    sp.add_argument("--horizon", default=None,
                    help="flow-parameter horizon for classification (default 500)")
    common(sp)
    sp.set_defaults(fn=cmd_solve)

    sp = sub.add_parser("scan", help="classify a grid of seeds against the region theorems")
    sp.add_argument("--model", required=True, choices=("bs", "bggg"))
    sp.add_argument("--bundle", default="p1", choices=("p1", "pid"))
    sp.add_argument("--f1-range", dest="f1_range", default=None, help="LO:HI:N")
    sp.add_argument("--g1-range", dest="g1_range", default=None, help="LO:HI:N")
    sp.add_argument("--y0-range", dest="y0_range", default=None, help="LO:HI:N (pid sweeps)")
    sp.add_argument("--horizon", default=None)
    sp.add_argument("--workers", default=None, help="worker processes (default: cores)")
    sp.add_argument("--frontier", action="store_true",
                    help="refine the existence boundary inside the open region")
    sp.add_argument("--heatmap", action="store_true",
                    help="also write gnuplot heatmap data")
    common(sp)
    sp.set_defaults(fn=cmd_scan)

    sp = sub.add_parser("verify", help="run a named acceptance subset")
    sp.add_argument("suite", help=f"one of: {', '.join(verify.SUITES)}")
    sp.add_argument("--x1", default=None, help="concentration parameter for the energy suite")
    common(sp)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("bubble", help="rescaled-comparison sup norms over a (lam, x1) grid")
    sp.add_argument("--x1", default=None, help="comma-separated concentration parameters")
    sp.add_argument("--lam", default=None, help="comma-separated transverse scales")
    common(sp)
    sp.set_defaults(fn=cmd_bubble)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
