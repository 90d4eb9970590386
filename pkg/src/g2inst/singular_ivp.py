"""Series seeds at the singular orbit t = 0 and regular-singular admissibility data.

The connection coefficients extend smoothly over the singular orbit only on
one of two homogeneous bundles, here tagged "P1" and "Pid".  On P1 the
coefficients f+, g+ are odd with f-(0) = g-(0) = 0; on Pid the plus
coefficients carry a 2/t pole and the minus ones share a free constant
value b0- at the orbit.  This module turns the free parameters of each case
into explicit truncated Taylor data and the handoff state at a small
t_start, and records the indicial eigenvalues that make the singular
initial value problems well posed (no eigenvalue may be a positive
integer).

Derived coefficients are computed with exact arithmetic whenever the inputs
are exact; only b^2 (never b itself) enters any formula, so exact mode works
for profiles whose b is irrational but b^2 rational.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .instanton_systems import StateFull, StateSU23
from .invariant_calculus import DomainError
from .metrics import BGGG_SEED, BS_SEED, taylor_seed_metric

__all__ = [
    "SingularSeed",
    "seed_p1",
    "seed_pid",
    "seed_su23_p1",
    "seed_su23_pid",
    "seed_for_model",
    "IndicialData",
    "indicial_data",
    "ExtensionReport",
    "extension_check",
    "BS_SEED_EXACT",
    "BGGG_SEED_EXACT",
]

# Exact (b^2, c) pairs for the two built-in profiles.
BS_SEED_EXACT = (Fraction(1, 3), Fraction(-1, 8))
BGGG_SEED_EXACT = (Fraction(9, 4), Fraction(-7, 108))

# t_start defaults: chosen so the first omitted series order (t^4 relative on
# P1, t^6 relative on Pid) sits at or below 1e-12.
_T_START_P1 = 1e-3
_T_START_PID = 1e-2


@dataclass(frozen=True)
class SingularSeed:
    """A bundle/symmetry case with its free parameters and derived series data."""

    bundle: str                # "P1" | "Pid"
    symmetry: str              # "SU2xU1" | "SU23"
    params: dict
    metric_seed: tuple         # (b^2, c); only b^2 enters the coefficient formulas
    derived: dict
    t_start: float

    def state_at(self, t: float) -> StateFull:
        """Truncated series state at 0 < t within the series radius."""
        b_sq, c = self.metric_seed
        d = self.derived
        if self.bundle == "P1":
            f1, g1 = self.params["f1_plus"], self.params["g1_plus"]
            return StateFull(
                float(f1 * t + d["u1_0"] * t ** 3),
                float(g1 * t + d["u2_0"] * t ** 3),
                0.0,
                0.0,
            )
        b0 = self.params["b0_minus"]
        lin_f = b0 * b0 / 4 - 1 / (4 * b_sq) - 4 * c
        lin_g = b0 * b0 / 4 + 2 * c
        minus = float(b0 + d["v_0"] * t * t)
        return StateFull(
            float(2 / t + lin_f * t + d["u_0"] * t ** 3),
            float(2 / t + lin_g * t + d["u_0"] * t ** 3),
            minus,
            minus,
        )

    @property
    def state_at_start(self) -> StateFull:
        return self.state_at(self.t_start)

    def su23_state_at(self, t: float) -> StateSU23:
        if self.symmetry != "SU23":
            raise DomainError("not a triply symmetric seed")
        s = self.state_at(t)
        return StateSU23(s.f_plus, s.f_minus)

    def regular_state_at(self, t: float, b: float, c: float) -> tuple:
        """(A_1 f+, A_1 g+, f-, g-): the quantities that stay finite at the orbit."""
        s = self.state_at(t)
        a1 = taylor_seed_metric(b, c, t).a1
        return (a1 * s.f_plus, a1 * s.g_plus, s.f_minus, s.g_minus)

    def to_json(self) -> str:
        payload = {
            "schema_version": 1,
            "bundle": self.bundle,
            "symmetry": self.symmetry,
            "params": {k: float(v) for k, v in self.params.items()},
            "metric_seed": {"b_sq": float(self.metric_seed[0]),
                            "c": float(self.metric_seed[1])},
            "derived": {k: float(v) for k, v in self.derived.items()},
            "t_start": self.t_start,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _c2_default(b_sq, c):
    return -(1 + 8 * c * b_sq) / (16 * b_sq)


def seed_p1(f1p, g1p, b=None, c=None, C2_0=None, *, b_sq=None,
            t_start: float | None = None, symmetry: str = "SU2xU1") -> SingularSeed:
    """P1 seed with free slopes (f1+, g1+): f+ = f1 t + u1(0) t^3, g+ = g1 t + u2(0) t^3.

    u1(0) = -f1 (1/(8b^2) + 2 C2(0) - c) - g1^2/2 and
    u2(0) = -(g1/2) (1/(4b^2) + 2c + f1); C2(0) defaults to the value the
    evolution system forces, -(1 + 8cb^2)/(16b^2).  Pass ``b_sq`` directly
    for exact-arithmetic seeds.
    """
    if b_sq is None:
        if b is None:
            raise DomainError("need b or b_sq")
        b_sq = b * b
    if b_sq == 0:
        raise DomainError("seed needs b != 0")
    if C2_0 is None:
        C2_0 = _c2_default(b_sq, c)
    u1_0 = -f1p * (1 / (8 * b_sq) + 2 * C2_0 - c) - g1p * g1p / 2
    u2_0 = -(g1p / 2) * (1 / (4 * b_sq) + 2 * c + f1p)
    return SingularSeed(
        "P1", symmetry,
        {"f1_plus": f1p, "g1_plus": g1p},
        (b_sq, c),
        {"u1_0": u1_0, "u2_0": u2_0},
        _T_START_P1 if t_start is None else t_start,
    )


def seed_pid(b0m, b=None, c=None, *, b_sq=None,
             t_start: float | None = None, symmetry: str = "SU2xU1") -> SingularSeed:
    """Pid seed with free orbit value b0- of the minus coefficients.

    The pole normalization forces 4 b2+ = b0-^2 - 1/b^2 and the shared cubic
    coefficient u(0) and quadratic minus coefficient v(0):

        u(0) = (35 (b^2 b0^2 - 16/7) b^2 b0^2 + 112 (b^2 c + 12) b^2 c + 22) / (480 b^4)
        v(0) = (b0 / 4b^2) (b^2 b0^2 - 2)
    """
    if b_sq is None:
        if b is None:
            raise DomainError("need b or b_sq")
        b_sq = b * b
    if b_sq == 0:
        raise DomainError("seed needs b != 0")
    bb0 = b_sq * b0m * b0m
    u_0 = (35 * (bb0 - Fraction(16, 7)) * bb0
           + 112 * (b_sq * c + 12) * b_sq * c + 22) / (480 * b_sq * b_sq)
    v_0 = (b0m / (4 * b_sq)) * (bb0 - 2)
    b2_plus = (b0m * b0m - 1 / b_sq) / 4
    return SingularSeed(
        "Pid", symmetry,
        {"b0_minus": b0m},
        (b_sq, c),
        {"u_0": u_0, "v_0": v_0, "b2_plus": b2_plus},
        _T_START_PID if t_start is None else t_start,
    )


def seed_su23_p1(x1, t_start: float | None = None) -> SingularSeed:
    """Triply symmetric P1 seed on the conical profile: x = x1 t - (x1/4 + x1^2/2) t^3."""
    b_sq, c = BS_SEED_EXACT
    return seed_p1(x1, x1, c=c, b_sq=b_sq, t_start=t_start, symmetry="SU23")


def seed_su23_pid(y0, t_start: float | None = None) -> SingularSeed:
    """Triply symmetric Pid seed on the conical profile.

    x = 2/t + ((y0^2 - 1)/4) t + O(t^3) and y = y0 + (y0/2)(y0^2/2 - 3) t^2 + O(t^4).
    """
    b_sq, c = BS_SEED_EXACT
    return seed_pid(y0, c=c, b_sq=b_sq, t_start=t_start, symmetry="SU23")


def seed_for_model(model: str, bundle: str, *, f1=None, g1=None, b0=None,
                   t_start: float | None = None) -> SingularSeed:
    """Seed with the built-in metric series data of "BS" or "BGGG"."""
    b_sq, c = BS_SEED_EXACT if model == "BS" else BGGG_SEED_EXACT
    if bundle == "P1":
        return seed_p1(f1, g1, c=c, b_sq=b_sq, t_start=t_start)
    return seed_pid(b0, c=c, b_sq=b_sq, t_start=t_start)


# ---------------------------------------------------------------------------
# Indicial (regular-singular-point) data


@dataclass(frozen=True)
class IndicialData:
    bundle: str
    symmetry: str
    matrix: np.ndarray
    eigenvalues: tuple
    admissible: bool


def indicial_data(bundle: str, symmetry: str, free_param: float = 1.0) -> IndicialData:
    """Linearization of the t^-1 part of the substituted series system.

    The eigenvalues are independent of the free parameter; admissibility is
    the condition that none of them is a positive integer, which makes the
    singular initial value problem uniquely solvable for each parameter
    choice.
    """
    p = free_param
    if (bundle, symmetry) == ("P1", "SU2xU1"):
        mat = np.diag([-2.0, -2.0, -6.0, -6.0])
    elif (bundle, symmetry) == ("Pid", "SU2xU1"):
        mat = np.array([
            [-6.0, 0.0, 0.0, 2.0 * p],
            [-3.0, -3.0, p, p],
            [0.0, 0.0, -6.0, 4.0],
            [0.0, 0.0, 2.0, -4.0],
        ])
    elif (bundle, symmetry) == ("P1", "SU23"):
        mat = np.diag([-2.0, -6.0])
    elif (bundle, symmetry) == ("Pid", "SU23"):
        mat = np.array([[-4.0, 0.0], [2.0 * p, -2.0]])
    else:
        raise DomainError(f"unknown case ({bundle}, {symmetry})")
    eigs = np.linalg.eigvals(mat)
    rounded = sorted(int(round(float(np.real(e)))) for e in eigs)
    if max(abs(float(np.real(e)) - r) for e, r in zip(sorted(eigs, key=np.real), rounded)) > 1e-9:
        raise RuntimeError("indicial eigenvalues did not come out integral")
    admissible = all(e <= 0 for e in rounded)
    return IndicialData(bundle, symmetry, mat, tuple(rounded), admissible)


# ---------------------------------------------------------------------------
# Extension verdicts from trajectory tails


@dataclass(frozen=True)
class ExtensionReport:
    bundle: str
    conditions: tuple          # of (name, passed, detail)
    passed: bool


def _log_slope(ts, vs):
    t = np.log(np.asarray(ts, dtype=float))
    v = np.log(np.abs(np.asarray(vs, dtype=float)))
    x = t - t.mean()
    return float(np.dot(x, v - v.mean()) / np.dot(x, x))


def extension_check(ts, states, bundle: str = "P1",
                    rel_tol: float = 5e-2, zero_tol: float = 1e-7) -> ExtensionReport:
    """Fit the leading parities/powers of a trajectory tail approaching t = 0.

    ``ts`` must be at least four strictly decreasing-toward-zero sample times
    (any order accepted; they are sorted), with matching StateFull samples.
    On P1 the plus coefficients must vanish linearly and the minus ones at
    least quadratically; on Pid the products t f+, t g+ must tend to 2 and
    the minus coefficients to a shared finite value.  Quartic growth of a
    minus coefficient (the non-extendable abelian behaviour) fails the check.
    """
    if len(ts) < 4 or len(ts) != len(states):
        raise DomainError("extension_check needs at least 4 tail samples")
    order = np.argsort(ts)
    ts = np.asarray(ts, dtype=float)[order]
    fp = np.array([states[i].f_plus for i in order])
    gp = np.array([states[i].g_plus for i in order])
    fm = np.array([states[i].f_minus for i in order])
    gm = np.array([states[i].g_minus for i in order])

    conds = []

    def vanishing_quadratically(name, vals):
        amp = float(np.max(np.abs(vals)))
        if amp < zero_tol:
            conds.append((name, True, f"identically small (max {amp:.2e})"))
            return
        slope = _log_slope(ts, vals)
        conds.append((name, slope >= 1.5,
                      f"log-log slope {slope:.3f} (need >= 2, tol 0.5)"))

    if bundle == "P1":
        for name, vals in (("f_plus ~ f1 t", fp), ("g_plus ~ g1 t", gp)):
            lin = vals / ts
            drift = abs(lin[1] - lin[0])
            scale = max(abs(lin[0]), abs(lin[1]), zero_tol)
            conds.append((name, drift <= rel_tol * scale + zero_tol,
                          f"f/t at two smallest t: {lin[0]:.6g}, {lin[1]:.6g}"))
        vanishing_quadratically("f_minus = O(t^2)", fm)
        vanishing_quadratically("g_minus = O(t^2)", gm)
    elif bundle == "Pid":
        for name, vals in (("t f_plus -> 2", fp), ("t g_plus -> 2", gp)):
            prod = ts * vals
            # Richardson in t^2 using the two smallest samples
            w = ts[1] ** 2 / (ts[1] ** 2 - ts[0] ** 2)
            extrap = w * prod[0] - (w - 1) * prod[1]
            conds.append((name, abs(extrap - 2.0) <= 1e-3,
                          f"extrapolated limit {extrap:.8f}"))
        for name, vals in (("f_minus finite", fm), ("g_minus finite", gm)):
            amp = float(np.max(np.abs(vals)))
            if amp < zero_tol:
                conds.append((name, True, f"identically small (max {amp:.2e})"))
                continue
            slope = _log_slope(ts, vals)
            drift = abs(vals[1] - vals[0])
            ok = slope > -0.5 and drift <= rel_tol * (1 + abs(vals[0]))
            detail = f"log-log slope {slope:.3f}, values {vals[0]:.6g}, {vals[1]:.6g}"
            if slope <= -2.5:
                detail += " (quartic-type divergence toward the orbit)"
            conds.append((name, ok, detail))
        conds.append(("f_minus - g_minus -> 0",
                      abs(fm[0] - gm[0]) <= rel_tol * (1 + abs(fm[0])),
                      f"difference {fm[0] - gm[0]:.3e}"))
    else:
        raise DomainError(f"unknown bundle {bundle!r}")

    return ExtensionReport(bundle, tuple(conds), all(ok for _, ok, _ in conds))
