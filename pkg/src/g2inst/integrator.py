"""Adaptive explicit Runge-Kutta marching with dense output and event detection.

The embedded pair is Dormand-Prince 5(4), written out here rather than taken
from a library so that trajectories are bit-reproducible and the step loop
can interleave the blow-up and exponential-growth events that the instanton
scans rely on.  Dense output is cubic Hermite on accepted steps.

One integration is single threaded and deterministic; trajectories are
immutable outputs and safe to share between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "StepControl",
    "StopReason",
    "Trajectory",
    "integrate",
    "detect_growth",
    "event_first_integral",
    "DriftReport",
]


@dataclass(frozen=True)
class StepControl:
    """Tolerances and event thresholds for one integration."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 1.0
    min_step: float = 1e-12
    blowup_threshold: float = 1e8
    growth_window: float = 10.0     # window length, in units of the march parameter
    growth_rate_floor: float = 0.05
    growth_size_floor: float = 10.0

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not self.min_step < self.max_step:
            raise ValueError("min_step must be below max_step")


@dataclass(frozen=True)
class StopReason:
    kind: str                  # ReachedEnd | FiniteBlowUp | ExponentialGrowth | StepUnderflow
    value: float | None = None  # blow-up parameter value, or fitted growth rate

    def __str__(self) -> str:
        return self.kind if self.value is None else f"{self.kind}({self.value:.6g})"


@dataclass(frozen=True)
class Trajectory:
    """Accepted-step samples of one integration, plus how and why it stopped."""

    params: np.ndarray          # strictly monotone march parameter
    states: np.ndarray          # one row per accepted step
    derivs: np.ndarray          # rhs values at the samples (for Hermite interpolation)
    stop: StopReason
    names: tuple = ()
    diagnostics: dict = field(default_factory=dict)
    conserved: np.ndarray | None = None

    @property
    def final_param(self) -> float:
        return float(self.params[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def sample(self, t: float) -> np.ndarray:
        """Cubic Hermite interpolation between the accepted steps."""
        p = self.params
        sign = 1.0 if p[-1] >= p[0] else -1.0
        q = sign * p
        x = sign * t
        if x <= q[0]:
            return self.states[0].copy()
        if x >= q[-1]:
            return self.states[-1].copy()
        i = int(np.searchsorted(q, x, side="right")) - 1
        return _hermite(p[i], self.states[i], self.derivs[i],
                        p[i + 1], self.states[i + 1], self.derivs[i + 1], t)

    def sample_many(self, ts: Sequence[float]) -> np.ndarray:
        return np.array([self.sample(t) for t in ts])


def _hermite(t0, y0, f0, t1, y1, f1, t):
    h = t1 - t0
    s = (t - t0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order weights are the last A row (FSAL); error weights are b5 - b4.
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def integrate(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float],
    span: tuple,
    control: StepControl = StepControl(),
    *,
    names: tuple = (),
    growth_component: int | None = None,
    conserved: Callable[[np.ndarray], float] | None = None,
    fixed_step: float | None = None,
) -> Trajectory:
    """March ``rhs`` over ``span`` with embedded-pair adaptive stepping.

    ``growth_component`` enables the exponential-growth event on that state
    component; ``conserved`` records a first integral at every accepted step
    so drift can be reported afterwards.  ``fixed_step`` disables error
    control (used by the order-verification suite).
    """
    t0, t_end = float(span[0]), float(span[1])
    if t_end == t0:
        raise ValueError("empty integration span")
    direction = 1.0 if t_end > t0 else -1.0

    y = np.asarray(y0, dtype=float).copy()
    t = t0
    f = np.asarray(rhs(t, y), dtype=float)

    ts = [t]
    ys = [y.copy()]
    fs = [f.copy()]
    cons = [conserved(y)] if conserved else None

    if fixed_step is not None:
        h = direction * abs(fixed_step)
    else:
        h = direction * min(control.max_step, abs(t_end - t0) / 100.0,
                            _initial_step(y, f, control))

    stop = None
    growth_rate = None
    k = np.empty((7, y.size))

    while True:
        remaining = t_end - t
        if direction * remaining <= 0:
            stop = StopReason("ReachedEnd")
            break
        if abs(h) > abs(remaining):
            h = remaining
        if fixed_step is None and abs(h) < control.min_step:
            stop = StopReason("StepUnderflow", t)
            break

        # DP5(4) stages, first-same-as-last
        k[0] = f
        failed = False
        for i in range(1, 7):
            yi = y + h * np.dot(_A[i], k[:i])
            if not np.all(np.isfinite(yi)):
                failed = True
                break
            k[i] = rhs(t + _C[i] * h, yi)
            if not np.all(np.isfinite(k[i])):
                failed = True
                break
        if failed:
            if fixed_step is not None:
                stop = StopReason("StepUnderflow", t)
                break
            h *= 0.25
            continue
        y_new = y + h * np.dot(_A[6], k[:6])
        err_vec = h * np.dot(_E, k)

        if fixed_step is None:
            scale = control.abs_tol + control.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
            err = math.sqrt(float(np.mean((err_vec / scale) ** 2)))
            if not math.isfinite(err):
                h *= 0.25
                continue
            if err > 1.0:
                h *= min(0.9 * err ** -0.2, 0.9)
                h = direction * max(abs(h), control.min_step * 0.5)
                if abs(h) < control.min_step:
                    stop = StopReason("StepUnderflow", t)
                    break
                continue
        else:
            err = 0.0

        f_new = k[6].copy()  # FSAL: stage 7 is rhs at (t + h, y_new)
        t_new = t + h

        if float(np.max(np.abs(y_new))) > control.blowup_threshold:
            t_star = _bisect_blowup(t, y, f, t_new, y_new, f_new, control.blowup_threshold)
            ts.append(t_new)
            ys.append(y_new.copy())
            fs.append(f_new.copy())
            if cons is not None:
                cons.append(conserved(y_new))
            stop = StopReason("FiniteBlowUp", t_star)
            break

        ts.append(t_new)
        ys.append(y_new.copy())
        fs.append(f_new.copy())
        if cons is not None:
            cons.append(conserved(y_new))
        t, y, f = t_new, y_new, f_new

        if growth_component is not None:
            growth_rate = _growth_event(ts, ys, growth_component, control)
            if growth_rate is not None:
                stop = StopReason("ExponentialGrowth", growth_rate)
                break

        if fixed_step is None:
            fac = 0.9 * err ** -0.2 if err > 0 else 5.0
            h = direction * min(control.max_step, abs(h) * min(5.0, max(0.2, fac)))

    params = np.array(ts)
    states = np.array(ys)
    derivs = np.array(fs)
    cons_arr = np.array(cons) if cons is not None else None
    diagnostics = {"n_steps": len(ts) - 1}
    if cons_arr is not None and len(cons_arr) > 0:
        diagnostics["conserved_drift"] = float(np.max(np.abs(cons_arr - cons_arr[0])))
    return Trajectory(params, states, derivs, stop, names, diagnostics, cons_arr)


def _initial_step(y, f, control):
    scale = control.abs_tol + control.rel_tol * float(np.max(np.abs(y))) if y.size else 1.0
    fn = float(np.max(np.abs(f))) if f.size else 0.0
    if fn <= 0:
        return control.max_step
    return max(control.min_step * 10, min(control.max_step, 0.01 * scale ** 0.2 / fn))


def _bisect_blowup(t0, y0, f0, t1, y1, f1, threshold):
    """First crossing of the blow-up threshold inside the last step, by bisection."""
    lo, hi = t0, t1
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        ym = _hermite(t0, y0, f0, t1, y1, f1, mid)
        if float(np.max(np.abs(ym))) > threshold:
            hi = mid
        else:
            lo = mid
        if abs(hi - lo) <= 1e-12 * (1 + abs(hi)):
            break
    return 0.5 * (lo + hi)


def _growth_event(ts, ys, comp, control):
    t_now = ts[-1]
    t_lo = t_now - control.growth_window
    if ts[0] > t_lo:
        return None
    window_t = []
    window_v = []
    for i in range(len(ts) - 1, -1, -1):
        if ts[i] < t_lo:
            break
        window_t.append(ts[i])
        window_v.append(ys[i][comp])
    if len(window_t) < 4:
        return None
    vals = np.abs(np.array(window_v))
    if float(np.min(vals)) < control.growth_size_floor:
        return None
    rate = _log_slope(np.array(window_t), vals)
    if rate is not None and rate >= control.growth_rate_floor:
        return rate
    return None


def _log_slope(ts, vals):
    if np.any(vals <= 0):
        return None
    x = ts - ts.mean()
    y = np.log(vals)
    denom = float(np.dot(x, x))
    if denom == 0:
        return None
    return float(np.dot(x, y - y.mean()) / denom)


def detect_growth(
    params: Sequence[float],
    values: Sequence[float],
    window: float = 10.0,
    rate_floor: float = 0.05,
    size_floor: float = 10.0,
) -> float | None:
    """Least-squares slope of log |G| over the trailing window.

    Returns the fitted rate when the window is long enough, the component is
    positive and above the size floor throughout, and the slope reaches the
    floor; otherwise None.
    """
    p = np.asarray(params, dtype=float)
    v = np.asarray(values, dtype=float)
    if p.size < 4 or p[-1] - p[0] < window:
        return None
    mask = p >= p[-1] - window
    vv = v[mask]
    if np.any(vv <= 0) or float(np.min(np.abs(vv))) < size_floor:
        return None
    rate = _log_slope(p[mask], np.abs(vv))
    if rate is not None and rate >= rate_floor:
        return rate
    return None


@dataclass(frozen=True)
class DriftReport:
    initial: float
    max_drift: float
    values: np.ndarray


def event_first_integral(traj: Trajectory) -> DriftReport:
    """Maximum drift of the conserved quantity recorded along the trajectory."""
    if traj.conserved is None:
        raise ValueError("trajectory carries no conserved-quantity samples")
    vals = traj.conserved
    return DriftReport(float(vals[0]), float(np.max(np.abs(vals - vals[0]))), vals)
