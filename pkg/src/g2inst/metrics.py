"""Closed-form torsion-free metric profiles on R4 x S3 and their ODE systems.

Two explicit families are built in: the asymptotically conical profile
("BS", r >= 1) and the asymptotically locally conical one ("BGGG",
r >= 9/4, in the normalization with circle length 2/3 at infinity and the
shifted coordinate s = r - 9/4).  Both come with exact first derivatives in
the arclength parameter t, the general six-function evolution system, the
series seeds at the singular orbit, and the coordinate transforms between
r, t and s.

Profiles and maps are immutable after construction; the coordinate tables
are built once and then shared read-only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .integrator import StepControl, Trajectory, integrate
from .invariant_calculus import DomainError

__all__ = [
    "MetricProfile",
    "CoordinateMap",
    "MetricBlowUpError",
    "bs_profile",
    "bggg_profile",
    "profile",
    "metric_ode_rhs",
    "metric_ode_rhs_reduced",
    "taylor_seed_metric",
    "integrate_metric",
    "coordinate_map",
    "drdt",
    "r_domain_min",
    "BS_SEED",
    "BGGG_SEED",
    "write_profile_csv",
]

SQRT3 = math.sqrt(3.0)

# Singular-orbit series data (b, c): B_i(0) = b and the cubic coefficient of A_1.
BS_SEED = (1.0 / SQRT3, -1.0 / 8.0)
BGGG_SEED = (1.5, -7.0 / 108.0)


class MetricBlowUpError(RuntimeError):
    """Metric integration left the domain; carries the last valid t."""

    def __init__(self, t_last: float):
        super().__init__(f"metric integration blew up after t = {t_last!r}")
        self.t_last = t_last


@dataclass(frozen=True)
class MetricProfile:
    """Profile values (A_1..A_3, B_1..B_3) and t-derivatives at one slice."""

    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float
    da1: float = 0.0
    da2: float = 0.0
    da3: float = 0.0
    db1: float = 0.0
    db2: float = 0.0
    db3: float = 0.0
    coord: str = "t"           # which parameter coord_value holds: t | r | s
    coord_value: float = 0.0
    model: str = "generic"     # BS | BGGG | taylor(b,c) | generic

    def row(self) -> tuple:
        return (self.coord_value, self.a1, self.a2, self.a3, self.b1, self.b2,
                self.b3, self.da1, self.da2, self.da3, self.db1, self.db2, self.db3)


def r_domain_min(model: str) -> float:
    if model == "BS":
        return 1.0
    if model == "BGGG":
        return 9.0 / 4.0
    raise DomainError(f"unknown metric model {model!r}")


def bs_profile(r: float) -> MetricProfile:
    """The asymptotically conical profile at radial coordinate r >= 1.

    A_1 = A_2 = A_3 = (r/3) sqrt(1 - r^-3), B_i = r/sqrt(3); t-derivatives
    follow from dr/dt = sqrt(1 - r^-3).
    """
    if r < 1.0:
        raise DomainError("BS profile needs r >= 1")
    rho = math.sqrt(max(1.0 - r ** -3, 0.0))
    a = (r / 3.0) * rho
    b = r / SQRT3
    da = (1.0 + 0.5 * r ** -3) / 3.0
    db = rho / SQRT3
    return MetricProfile(a, a, a, b, b, b, da, da, da, db, db, db, "r", r, "BS")


def bggg_profile(r: float) -> MetricProfile:
    """The asymptotically locally conical profile at r >= 9/4 (circle length 2/3).

    dr/dt equals A_1 here, so all t-derivatives are regular down to the
    singular orbit at r = 9/4 where dA_1 = dA_2 = 1/2.
    """
    if r < 2.25:
        raise DomainError("BGGG profile needs r >= 9/4")
    u = (r - 2.25) * (r + 2.25)
    v = (r - 0.75) * (r + 0.75)
    a1 = math.sqrt(u / v)
    a2 = math.sqrt((r - 2.25) * (r + 0.75) / 3.0)
    b1 = 2.0 * r / 3.0
    b2 = math.sqrt((r - 0.75) * (r + 2.25) / 3.0)
    da1 = 9.0 * r / (2.0 * v * v)
    # dA_2/dt = A_1 (2r - 3/2) / (6 A_2); the ratio A_1/A_2 stays regular at 9/4
    ratio12 = math.sqrt(3.0 * (r + 2.25) / ((r - 0.75) * (r + 0.75) ** 2))
    da2 = ratio12 * (2.0 * r - 1.5) / 6.0
    db1 = 2.0 * a1 / 3.0
    db2 = a1 * (2.0 * r + 1.5) / (6.0 * b2)
    return MetricProfile(a1, a2, a2, b1, b2, b2, da1, da2, da2, db1, db2, db2,
                         "r", r, "BGGG")


def profile(model: str, r: float) -> MetricProfile:
    return bs_profile(r) if model == "BS" else bggg_profile(r)


def drdt(model: str, r: float) -> float:
    """dr/dt along the geodesic parametrization."""
    if model == "BS":
        return math.sqrt(max(1.0 - r ** -3, 0.0))
    if model == "BGGG":
        u = max((r - 2.25) * (r + 2.25), 0.0)
        return math.sqrt(u / ((r - 0.75) * (r + 0.75)))
    raise DomainError(f"unknown metric model {model!r}")


# ---------------------------------------------------------------------------
# Evolution systems


def metric_ode_rhs(p: MetricProfile) -> tuple:
    """(dA_1..dA_3, dB_1..dB_3) from the general six-function evolution system."""
    A = (p.a1, p.a2, p.a3)
    B = (p.b1, p.b2, p.b3)
    if any(x == 0 for x in A) or any(x == 0 for x in B):
        raise DomainError("six-function system needs nonzero A_i, B_i")
    dA = []
    dB = []
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        dA.append(0.5 * (A[i] ** 2 / (A[j] * A[k]) - A[i] ** 2 / (B[j] * B[k])
                         - (A[j] ** 2 + A[k] ** 2) / (A[j] * A[k])
                         + (B[j] ** 2 + B[k] ** 2) / (B[j] * B[k])))
        dB.append(0.5 * ((A[j] ** 2 + B[k] ** 2) / (A[j] * B[k])
                         + (A[k] ** 2 + B[j] ** 2) / (A[k] * B[j])
                         - B[i] ** 2 / (A[j] * B[k]) - B[i] ** 2 / (A[k] * B[j])))
    return (*dA, *dB)


def metric_ode_rhs_reduced(a1: float, a2: float, b1: float, b2: float) -> tuple:
    """(dA_1, dA_2, dB_1, dB_2) of the four-function system with A_2=A_3, B_2=B_3."""
    if a1 == 0 or a2 == 0 or b1 == 0 or b2 == 0:
        raise DomainError("reduced system needs nonzero A_1, A_2, B_1, B_2")
    da1 = 0.5 * (a1 * a1 / (a2 * a2) - a1 * a1 / (b2 * b2))
    da2 = 0.5 * ((b1 * b1 + b2 * b2 - a2 * a2) / (b1 * b2) - a1 / a2)
    db1 = (a2 * a2 + b2 * b2 - b1 * b1) / (a2 * b2)
    db2 = 0.5 * ((a2 * a2 + b1 * b1 - b2 * b2) / (a2 * b1) + a1 / b2)
    return da1, da2, db1, db2


def taylor_seed_metric(b: float, c: float, t: float) -> MetricProfile:
    """Series profile near the singular orbit, through t^5 for A and t^4 for B.

    A_1 = t/2 + c t^3 + a15 t^5,    A_2 = A_3 = t/2 + c2 t^3 + a25 t^5,
    B_1 = b + t^2/(4b) + b14 t^4,   B_2 = B_3 = b + t^2/(4b) + b24 t^4,
    with the coefficients determined by the evolution system:
    c2 = -(1 + 8cb^2)/(16 b^2) and the quoted quintic/quartic corrections.
    """
    if b == 0:
        raise DomainError("series seed needs b != 0")
    b2_ = b * b
    b4_ = b2_ * b2_
    cb2 = c * b2_
    c2 = -(1 + 8 * cb2) / (16 * b2_)
    a15 = (96 * (22 * cb2 + 1) * cb2 + 11) / (640 * b4_)
    # sign fixed against both closed-form profiles: +3/20 when A_2 = A_1 on
    # the conical profile, -11/19440 on the ALC one
    a25 = (11 - 24 * (32 * cb2 + 1) * cb2) / (640 * b4_)
    b14 = -(7 + 8 * cb2) / (160 * b2_ * b)
    b24 = -(13 - 8 * cb2) / (320 * b2_ * b)

    t2 = t * t
    a1 = t / 2 + c * t * t2 + a15 * t2 * t2 * t
    a2 = t / 2 + c2 * t * t2 + a25 * t2 * t2 * t
    b1v = b + t2 / (4 * b) + b14 * t2 * t2
    b2v = b + t2 / (4 * b) + b24 * t2 * t2
    da1 = 0.5 + 3 * c * t2 + 5 * a15 * t2 * t2
    da2 = 0.5 + 3 * c2 * t2 + 5 * a25 * t2 * t2
    db1 = t / (2 * b) + 4 * b14 * t * t2
    db2 = t / (2 * b) + 4 * b24 * t * t2
    return MetricProfile(a1, a2, a2, b1v, b2v, b2v, da1, da2, da2, db1, db2, db2,
                         "t", t, f"taylor({b},{c})")


def series_c2_coefficient(b_sq, c):
    """Cubic coefficient of A_2: -(1 + 8 c b^2) / (16 b^2); exact on exact input."""
    return -(1 + 8 * c * b_sq) / (16 * b_sq)


def integrate_metric(b: float, c: float, t_end: float,
                     t_start: float | None = None,
                     control: StepControl | None = None) -> Trajectory:
    """March the reduced system from the series seed to t_end.

    The state vector is (A_1, A_2, B_1, B_2).  The smooth family has a
    perturbation mode that grows like t^2 relative to the solution, so local
    errors injected near the orbit are amplified by (t_end/t_start)^2; the
    default t_start = 4e-3 |b| and the tight tolerances balance that
    amplification against the omitted series order (t^7, relative ~1e-14 at
    the default handoff).  Raises :class:`MetricBlowUpError` if the profile
    leaves the domain early and :class:`DomainError` when t_end <= t_start.
    """
    if t_start is None:
        t_start = 4e-3 * abs(b)
    if t_start == 0 or (t_end - t_start) * math.copysign(1.0, t_start) <= 0:
        raise DomainError("t_end must lie beyond t_start, away from the singular orbit")
    seed = taylor_seed_metric(b, c, t_start)
    y0 = (seed.a1, seed.a2, seed.b1, seed.b2)
    ctrl = control or StepControl(rel_tol=1e-13, abs_tol=1e-16, max_step=0.05)

    def rhs(_t, y):
        return np.array(metric_ode_rhs_reduced(*y))

    traj = integrate(rhs, y0, (t_start, t_end), ctrl,
                     names=("A1", "A2", "B1", "B2"))
    if traj.stop.kind != "ReachedEnd":
        raise MetricBlowUpError(traj.final_param)
    signs = np.sign(np.asarray(y0))
    bad = np.nonzero(np.min(traj.states * signs, axis=1) <= 0.0)[0]
    if bad.size:  # a profile function changed sign: left the metric cone
        last_good = traj.params[bad[0] - 1] if bad[0] > 0 else t_start
        raise MetricBlowUpError(float(last_good))
    return traj


def trajectory_profile(traj: Trajectory, t: float, model: str = "generic") -> MetricProfile:
    """Profile (with ODE-consistent derivatives) interpolated from a metric trajectory."""
    a1, a2, b1, b2 = traj.sample(t)
    da1, da2, db1, db2 = metric_ode_rhs_reduced(a1, a2, b1, b2)
    return MetricProfile(a1, a2, a2, b1, b2, b2, da1, da2, da2, db1, db2, db2,
                         "t", t, model)


# ---------------------------------------------------------------------------
# Coordinate transforms


@dataclass(frozen=True)
class CoordinateMap:
    """Monotone correspondence between the radial coordinate r and arclength t.

    t(r) is evaluated by adaptive quadrature after the substitution
    r = r_min + u^2, which removes the inverse-square-root singularity of
    dt/dr at the singular orbit; a tabulated grid brackets the inverse.
    """

    model: str
    r_min: float
    table_r: np.ndarray
    table_t: np.ndarray

    def t_of_r(self, r: float) -> float:
        if r < self.r_min:
            raise DomainError(f"r = {r} below domain minimum {self.r_min}")
        val, _ = quad(self._integrand_u, 0.0, math.sqrt(r - self.r_min),
                      epsabs=1e-13, epsrel=1e-13, limit=200)
        return val

    def _integrand_u(self, u: float) -> float:
        s = self.r_min + u * u
        if self.model == "BS":
            # dt/dr = 1/sqrt(1 - s^-3); with s = 1 + u^2 the factor (s-1)
            # cancels exactly: integrand = 2 sqrt(s^3 / (s^2 + s + 1)).
            return 2.0 * math.sqrt(s ** 3 / (s * s + s + 1.0))
        return 2.0 * math.sqrt((s - 0.75) * (s + 0.75) / (s + 2.25))

    def r_of_t(self, t: float) -> float:
        if t < 0:
            raise DomainError("t must be nonnegative")
        if t == 0.0:
            return self.r_min
        idx = int(np.searchsorted(self.table_t, t))
        lo = self.table_r[max(idx - 1, 0)]
        hi_idx = min(idx, len(self.table_r) - 1)
        hi = self.table_r[hi_idx]
        while self.t_of_r(hi) < t:  # extend bracket beyond the table if needed
            lo, hi = hi, 2.0 * hi
        if lo == hi:
            return float(lo)
        return float(brentq(lambda r: self.t_of_r(r) - t, lo, hi,
                            xtol=1e-13, rtol=8.9e-16, maxiter=200))

    def s_of_r(self, r: float) -> float:
        """The flow parameter s with ds/dt = A_1 and s = 0 at the singular orbit."""
        if self.model == "BS":
            return (r * r - 1.0) / 6.0
        return r - 2.25

    def r_of_s(self, s: float) -> float:
        if self.model == "BS":
            return math.sqrt(1.0 + 6.0 * s)
        return s + 2.25

    def r_on_grid(self, ts: Sequence[float]) -> np.ndarray:
        """r at many (sorted, positive) t values via one ODE march of dr/dt.

        Accuracy degrades near the orbit where dr/dt has a square-root
        profile, so the march starts at half the first requested t (anchored
        by quadrature inversion there).
        """
        ts = np.asarray(ts, dtype=float)
        if np.any(np.diff(ts) <= 0):
            raise DomainError("t grid must be strictly increasing")
        t0 = 0.5 * ts[0]
        r0 = self.r_of_t(t0)
        model = self.model

        def rhs(_t, y):
            return np.array([drdt(model, max(y[0], self.r_min))])

        # dense output is cubic Hermite between accepted steps, so cap the
        # step to keep the interpolation error near the march tolerance
        ctrl = StepControl(rel_tol=1e-12, abs_tol=1e-14, max_step=0.05)
        traj = integrate(rhs, [r0], (t0, float(ts[-1]) * (1 + 1e-12)), ctrl)
        return np.array([traj.sample(t)[0] for t in ts])


def coordinate_map(model: str, r_max: float = 400.0, n_table: int = 2048) -> CoordinateMap:
    r_min = r_domain_min(model)
    m = CoordinateMap(model, r_min, np.array([]), np.array([]))
    u_max = math.sqrt(r_max - r_min)
    us = np.linspace(0.0, u_max, n_table)
    rs = r_min + us * us
    t_vals = [0.0]
    for i in range(1, len(rs)):
        seg, _ = quad(m._integrand_u, us[i - 1], us[i], epsabs=1e-13, epsrel=1e-13)
        t_vals.append(t_vals[-1] + seg)
    return CoordinateMap(model, r_min, rs, np.array(t_vals))


# ---------------------------------------------------------------------------
# Export


_CSV_HEADER = ("coord", "A1", "A2", "A3", "B1", "B2", "B3",
               "dA1", "dA2", "dA3", "dB1", "dB2", "dB3")


def write_profile_csv(path, profiles: Iterable[MetricProfile],
                      extra_columns: dict | None = None) -> None:
    """Profile table as RFC 4180 CSV; floats carry 17 significant digits."""
    extra = extra_columns or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(_CSV_HEADER) + list(extra))
        for i, p in enumerate(profiles):
            row = [f"{x:.17g}" for x in p.row()]
            row += [f"{extra[k][i]:.17g}" for k in extra]
            w.writerow(row)
