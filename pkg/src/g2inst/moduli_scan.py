"""Parallel classification sweeps over seed-parameter planes.

A scan turns every grid cell (f1+, g1+) (or y0 for the one-parameter
sweep) into seed -> integrate -> classify, tags it with the theorem
prediction for its region, and reports any disagreement.  Cells are
independent tasks on a bounded process pool; results are assembled by cell
index, so repeated scans are bit-identical regardless of worker count.

Region tags on the ALC profile: existence is guaranteed for
f1 >= 1/2 + g1, non-existence (with bounded curvature, for irreducible
connections) for g1 > 0 with f1 <= 1/2 or g1 >= f1, and the wedge
0 < f1 - 1/2 < g1 < f1 is genuinely open; the scan charts it and the
``frontier`` refinement estimates the boundary inside it.  On the conical
profile the conserved quantity c = 4(f1^2 - g1^2) splits the plane instead:
c = 0 is the locus of the explicit irreducible family, c < 0 blows up at
finite flow parameter, and c > 0 trajectories converge onto the abelian
locus (G -> 0 with F -> sqrt(c)); the c > 0 cells are therefore predicted
"AbelianLimit" and checked against that convergence.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import Verdict, classify, curvature_report_fg, holonomy_infinity
from .instanton_systems import integrate_fg, integrate_su23
from .integrator import StepControl
from .invariant_calculus import DomainError
from .metrics import coordinate_map
from .singular_ivp import seed_su23_pid

__all__ = [
    "Axis",
    "ScanSpec",
    "CellResult",
    "ScanResult",
    "scan",
    "frontier",
    "predict_region",
]

_C_TOL = 1e-12          # conical first-integral tolerance for the c = 0 locus
_ABELIAN_G_TOL = 1e-6   # |G| at the horizon for "converged onto the abelian locus"


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("axis resolution must be >= 2")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


@dataclass(frozen=True)
class ScanSpec:
    model: str                       # "BS" | "BGGG"
    bundle: str                      # "P1" | "Pid"
    axes: tuple
    horizon: float = 500.0
    control: StepControl = field(default_factory=lambda: StepControl(
        rel_tol=1e-10, abs_tol=1e-12, max_step=1.0))

    def __post_init__(self):
        if not self.axes:
            raise DomainError("scan needs at least one axis")


@dataclass(frozen=True)
class CellResult:
    index: tuple
    params: dict
    verdict: str
    prediction: str
    agrees: bool
    evidence: dict


@dataclass
class ScanResult:
    spec: ScanSpec
    cells: list
    disagreements: list

    def cell(self, *index) -> CellResult:
        return self._by_index[tuple(index)]

    @property
    def _by_index(self):
        if not hasattr(self, "_idx_cache"):
            self._idx_cache = {c.index: c for c in self.cells}
        return self._idx_cache

    def counts(self) -> dict:
        out: dict = {}
        for c in self.cells:
            out[c.verdict] = out.get(c.verdict, 0) + 1
        return out

    def to_csv(self, path) -> None:
        keys = ("F_end", "G_end", "F_inf", "sup_F_A", "growth_rate", "c0", "stop")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            names = [a.name for a in self.spec.axes]
            w.writerow(["i", "j"][: len(self.spec.axes)] + names
                       + ["verdict", "prediction", "agrees"] + list(keys))
            for c in self.cells:
                row = [str(i) for i in c.index]
                row += [f"{c.params[n]:.17g}" for n in names]
                row += [c.verdict, c.prediction, str(c.agrees)]
                for k in keys:
                    v = c.evidence.get(k)
                    row.append("" if v is None else
                               (f"{v:.17g}" if isinstance(v, float) else str(v)))
                w.writerow(row)

    def to_json(self, path, frontier_polyline=None) -> None:
        payload = {
            "schema_version": 1,
            "model": self.spec.model,
            "bundle": self.spec.bundle,
            "horizon": self.spec.horizon,
            "axes": [{"name": a.name, "lo": a.lo, "hi": a.hi, "n": a.n}
                     for a in self.spec.axes],
            "counts": self.counts(),
            "n_disagreements": len(self.disagreements),
            "disagreements": [
                {"index": list(c.index), "params": c.params,
                 "verdict": c.verdict, "prediction": c.prediction}
                for c in self.disagreements
            ],
        }
        if frontier_polyline is not None:
            payload["frontier"] = [
                {"f1": p[0], "g1": p[1], "width": p[2]} for p in frontier_polyline
            ]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)

    def write_heatmap(self, path) -> None:
        """Gnuplot-style blocks: one line per cell 'x y code', blank between rows."""
        codes = {"GlobalBoundedCurvature": 0, "CurvatureUnbounded": 1,
                 "FiniteBlowUp": 2, "Inconclusive": 3}
        if len(self.spec.axes) != 2:
            raise DomainError("heatmap needs a 2D scan")
        n2 = self.spec.axes[1].n
        with open(path, "w") as fh:
            for c in self.cells:
                x = c.params[self.spec.axes[0].name]
                y = c.params[self.spec.axes[1].name]
                fh.write(f"{x:.17g} {y:.17g} {codes.get(c.verdict, 3)}\n")
                if c.index[-1] == n2 - 1:
                    fh.write("\n")


def predict_region(model: str, f1: float, g1: float) -> str:
    """Theorem tag of a P1 cell: MustExist / MustNotExist / AbelianLimit / Open."""
    if model == "BGGG":
        if g1 == 0.0 or f1 >= 0.5 + g1:
            return "MustExist"
        if g1 > 0.0 and (f1 <= 0.5 or g1 >= f1):
            return "MustNotExist"
        return "Open"
    c = 4.0 * (f1 * f1 - g1 * g1)
    if g1 == 0.0 or abs(c) <= _C_TOL:
        return "MustExist"
    if c < 0.0:
        return "MustNotExist"
    return "AbelianLimit"


def _agrees(prediction: str, verdict: Verdict) -> bool:
    if prediction == "MustExist":
        return verdict.tag == "GlobalBoundedCurvature"
    if prediction == "MustNotExist":
        return verdict.tag in ("CurvatureUnbounded", "FiniteBlowUp")
    if prediction == "AbelianLimit":
        return (verdict.tag == "GlobalBoundedCurvature"
                and bool(verdict.evidence.get("reduces_to_abelian")))
    return True


def classify_p1_cell(model: str, f1: float, g1: float, horizon: float,
                     control: StepControl) -> Verdict:
    """Seed -> integrate -> classify for one P1 cell, in the (F, G) plane.

    The regular initial data are F(0) = 2 f1, G(0) = 2 g1.  Abelian cells
    (g1 = 0) short-circuit to the closed-form classification so the
    measure-zero locus is never misclassified by growth heuristics.
    """
    if g1 == 0.0:
        return Verdict("GlobalBoundedCurvature",
                       {"abelian": True, "F_end": 2.0 * f1, "G_end": 0.0,
                        "stop": "ClosedForm"})
    c0 = 4.0 * (f1 * f1 - g1 * g1)
    traj = integrate_fg(model, 2.0 * f1, 2.0 * g1, horizon, control)
    v = classify(traj, None, alc_certificate=(model == "BGGG"))
    ev = dict(v.evidence)
    ev["c0"] = c0
    if model == "BS" and v.tag == "GlobalBoundedCurvature":
        drift = traj.diagnostics.get("conserved_drift")
        if drift is not None:
            ev["first_integral_drift"] = drift
        if c0 > _C_TOL:
            g_end = abs(float(traj.final_state[1]))
            f_end = float(traj.final_state[0])
            ev["reduces_to_abelian"] = (
                g_end <= _ABELIAN_G_TOL
                and abs(f_end - math.sqrt(c0)) <= 1e-6 * (1.0 + math.sqrt(c0)))
    if v.tag == "GlobalBoundedCurvature" and not ev.get("abelian"):
        try:
            ev["F_inf"] = holonomy_infinity(traj)[0]
        except DomainError:
            pass
    return Verdict(v.tag, ev)


def _p1_cell_task(args):
    spec, i, j, f1, g1 = args
    verdict = classify_p1_cell(spec.model, f1, g1, spec.horizon, spec.control)
    pred = predict_region(spec.model, f1, g1)
    return CellResult((i, j), {"f1": f1, "g1": g1}, verdict.tag, pred,
                      _agrees(pred, verdict), verdict.evidence)


def _pid_cell_task(args):
    spec, i, y0 = args
    verdict = classify_pid_bs_cell(y0, spec.horizon, spec.control)
    # only the explicit limit solution is proven to extend; the rest of the
    # one-parameter family is charted, not predicted
    pred = "MustExist" if y0 == 0.0 else "Open"
    return CellResult((i,), {"y0": y0}, verdict.tag, pred,
                      _agrees(pred, verdict), verdict.evidence)


_PID_CMAP = None


def classify_pid_bs_cell(y0: float, horizon_t: float = 20.0,
                         control: StepControl | None = None) -> Verdict:
    """March the triply symmetric Pid seed on the conical profile in t."""
    global _PID_CMAP
    if _PID_CMAP is None:
        _PID_CMAP = coordinate_map("BS")
    ctrl = control or StepControl(rel_tol=1e-10, abs_tol=1e-12, max_step=0.5)
    sd = seed_su23_pid(y0)
    r0 = _PID_CMAP.r_of_t(sd.t_start)
    traj = integrate_su23(sd.t_start, r0, sd.su23_state_at(sd.t_start),
                          min(horizon_t, 20.0), ctrl)
    ev = {"stop": str(traj.stop), "y0": y0}
    if traj.stop.kind == "FiniteBlowUp":
        ev["blowup_t"] = traj.stop.value
        return Verdict("FiniteBlowUp", ev)
    if traj.stop.kind != "ReachedEnd":
        return Verdict("Inconclusive", ev)
    x_end, y_end = float(traj.final_state[1]), float(traj.final_state[2])
    ev.update(x_end=x_end, y_end=y_end)
    if abs(x_end) < 1e3 and abs(y_end) < 1e3:
        return Verdict("GlobalBoundedCurvature", ev)
    return Verdict("Inconclusive", ev)


def scan(spec: ScanSpec, workers: int | None = None) -> ScanResult:
    """Classify every grid cell; per-cell failures are recorded, never raised."""
    if spec.bundle == "P1":
        ax_f, ax_g = spec.axes
        tasks = [(spec, i, j, float(f1), float(g1))
                 for i, f1 in enumerate(ax_f.values())
                 for j, g1 in enumerate(ax_g.values())]
        runner = _p1_cell_task
    else:
        (ax,) = spec.axes
        tasks = [(spec, i, float(y0)) for i, y0 in enumerate(ax.values())]
        runner = _pid_cell_task

    results: dict = {}
    if workers is None or workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for cell in pool.map(runner, tasks, chunksize=8):
                results[cell.index] = cell
    else:
        for t in tasks:
            cell = runner(t)
            results[cell.index] = cell
    cells = [results[k] for k in sorted(results)]
    disagreements = [c for c in cells if not c.agrees]
    return ScanResult(spec, cells, disagreements)


def frontier(result: ScanResult, depth: int = 10) -> list:
    """Estimated existence boundary inside the open wedge, by bisection.

    For each g1 grid row the scan's verdicts bracket the boundary between a
    non-global and a global cell; the bracket is refined by classifying
    fresh seeds at midpoints.  Returns (f1_star, g1, final_width) triples.
    The polyline is exploratory output: the open region carries no theorem.
    """
    spec = result.spec
    if spec.bundle != "P1" or len(spec.axes) != 2:
        raise DomainError("frontier needs a 2D P1 scan")
    ax_f, ax_g = spec.axes
    f_vals = ax_f.values()
    g_vals = ax_g.values()
    is_global = {c.index: c.verdict == "GlobalBoundedCurvature" for c in result.cells}
    out = []
    for j, g1 in enumerate(g_vals):
        if g1 <= 0:
            continue
        bracket = None
        for i in range(len(f_vals) - 1):
            if not is_global[(i, j)] and is_global[(i + 1, j)]:
                bracket = (float(f_vals[i]), float(f_vals[i + 1]))
                break
        if bracket is None:
            continue
        lo, hi = bracket
        for _ in range(depth):
            mid = 0.5 * (lo + hi)
            v = classify_p1_cell(spec.model, mid, float(g1), spec.horizon, spec.control)
            if v.tag == "GlobalBoundedCurvature":
                hi = mid
            else:
                lo = mid
        out.append((0.5 * (lo + hi), float(g1), hi - lo))
    return out
