"""Reduced instanton ODE systems and every closed-form solution family.

The reduction tower, from most general to most special:

* ``rhs_general``: six su(2)-valued equations for the rescaled coefficients
  (c_1+, c_2+, c_3+, c_1-, c_2-, c_3-), valid on any circle-symmetric
  torsion-free profile, with the bracket constraint sum_i [c_i+, c_i-] = 0.
* ``rhs_full``: the four scalar equations for (f+, g+, f-, g-) obtained on
  the one-T_1 / one-T_2 / one-T_3 ansatz.
* ``rhs_su23``: the two equations for (x, y) on the triply symmetric profile.
* ``rhs_fg``: the plane system F' = -G^2, G' = (H - F) G in the flow
  parameter s (ds/dt = A_1); H vanishes identically on the conical profile
  and is the rational function ``h_of_r`` on the ALC one.

Closed forms: the one-parameter concentrating family (x1 >= 0), its
bubbling limit, and the abelian families on both profiles.

All right-hand sides take metric data by value (a MetricProfile snapshot),
so tabulated, closed-form and series-integrated metrics share one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .integrator import StepControl, Trajectory, integrate
from .invariant_calculus import DomainError, LieValue
from .metrics import CoordinateMap, MetricProfile, coordinate_map, drdt, profile

__all__ = [
    "StateFull",
    "StateSU23",
    "StateFG",
    "AbelianState",
    "GeneralState",
    "rhs_full",
    "rhs_general",
    "rhs_su23",
    "rhs_fg",
    "h_of_r",
    "h_from_profile",
    "abelian_rates",
    "abelian_solution",
    "clarke_closed_form",
    "clarke_pole",
    "clarke_w",
    "clarke_w_dr",
    "alim_closed_form",
    "alim_w",
    "alim_w_dr",
    "abelian_profile",
    "abelian_profile_dr",
    "integrate_full",
    "integrate_su23",
    "integrate_fg",
    "LIMIT_CONNECTION_COEFF",
]

# Coefficient of the irreducible limit connection at infinity: A_1 x -> 2/3.
LIMIT_CONNECTION_COEFF = 2.0 / 3.0


# ---------------------------------------------------------------------------
# State records


@dataclass(frozen=True)
class StateFull:
    """Connection coefficients (f+, g+, f-, g-) of the circle-symmetric ansatz."""

    f_plus: float
    g_plus: float
    f_minus: float
    g_minus: float

    def as_array(self) -> np.ndarray:
        return np.array([self.f_plus, self.g_plus, self.f_minus, self.g_minus])


@dataclass(frozen=True)
class StateSU23:
    """Coefficients (x, y) of the triply symmetric ansatz."""

    x: float
    y: float

    def embed(self) -> StateFull:
        return StateFull(self.x, self.x, self.y, self.y)


@dataclass(frozen=True)
class StateFG:
    """Transformed coefficients F = f+/A_1, G = g+/A_1 in the flow parameter s."""

    F: float
    G: float
    c_first_integral: float | None = None  # F^2 - G^2, conserved when H = 0


@dataclass(frozen=True)
class AbelianState:
    a1p: float
    a2p: float
    a3p: float
    a1m: float
    a2m: float
    a3m: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a1p, self.a2p, self.a3p, self.a1m, self.a2m, self.a3m])


@dataclass(frozen=True)
class GeneralState:
    """Six su(2) values (c_1+, c_2+, c_3+, c_1-, c_2-, c_3-)."""

    c1p: LieValue
    c2p: LieValue
    c3p: LieValue
    c1m: LieValue
    c2m: LieValue
    c3m: LieValue

    @property
    def plus(self) -> tuple:
        return (self.c1p, self.c2p, self.c3p)

    @property
    def minus(self) -> tuple:
        return (self.c1m, self.c2m, self.c3m)

    @staticmethod
    def from_full(s: StateFull) -> "GeneralState":
        T1, T2, T3 = LieValue.basis_T(1), LieValue.basis_T(2), LieValue.basis_T(3)
        return GeneralState(
            T1.scale(s.f_plus), T2.scale(s.g_plus), T3.scale(s.g_plus),
            T1.scale(s.f_minus), T2.scale(s.g_minus), T3.scale(s.g_minus),
        )


# ---------------------------------------------------------------------------
# Coefficient helpers shared by the systems


def _coeffs(m: MetricProfile) -> tuple:
    """(q, p, rr, lin1) with q = (A2^2+B1^2+B2^2)/(A2 B1 B2), etc."""
    a1, a2, b1, b2 = m.a1, m.a2, m.b1, m.b2
    if a1 <= 0 or a2 <= 0 or b1 <= 0 or b2 <= 0:
        raise DomainError("instanton systems need a nondegenerate profile")
    q = (a2 * a2 + b1 * b1 + b2 * b2) / (a2 * b1 * b2)
    p = (a1 * a1 + 2 * a2 * a2) / (a1 * a2 * a2)
    rr = (a1 * a1 + 2 * b2 * b2) / (a1 * b2 * b2)
    lin1 = 0.5 * (a1 / (b2 * b2) - a1 / (a2 * a2))
    return q, p, rr, lin1


def rhs_full(s: StateFull, m: MetricProfile) -> StateFull:
    """Rates of the four scalar equations of the circle-symmetric ansatz."""
    q, p, rr, lin1 = _coeffs(m)
    fp, gp, fm, gm = s.f_plus, s.g_plus, s.f_minus, s.g_minus
    return StateFull(
        -lin1 * fp + gm * gm - gp * gp,
        -0.5 * (q - p) * gp + fm * gm - fp * gp,
        -q * fm + 2 * gm * gp,
        -0.5 * (q + rr) * gm + gm * fp + gp * fm,
    )


def rhs_general(s: GeneralState, m: MetricProfile) -> tuple:
    """Rates of the six bracket equations, plus the constraint sum [c_i+, c_i-].

    On the ansatz c_1+- = f+- T_1, c_2+- = g+- T_2, c_3+- = g+- T_3 this
    reduces componentwise to :func:`rhs_full`.
    """
    q, p, rr, lin1 = _coeffs(m)
    c1p, c2p, c3p = s.plus
    c1m, c2m, c3m = s.minus
    half = 0.5
    d1p = c1p.scale(-lin1) + (c2m.bracket(c3m) - c2p.bracket(c3p)).scale(half)
    d2p = c2p.scale(-half * (q - p)) + (c3m.bracket(c1m) - c3p.bracket(c1p)).scale(half)
    d3p = c3p.scale(-half * (q - p)) + (c1m.bracket(c2m) - c1p.bracket(c2p)).scale(half)
    d1m = c1m.scale(-q) + (c2m.bracket(c3p) + c2p.bracket(c3m)).scale(half)
    d2m = c2m.scale(-half * (q + rr)) + (c3m.bracket(c1p) + c3p.bracket(c1m)).scale(half)
    d3m = c3m.scale(-half * (q + rr)) + (c1m.bracket(c2p) + c1p.bracket(c2m)).scale(half)
    constraint = c1p.bracket(c1m) + c2p.bracket(c2m) + c3p.bracket(c3m)
    return GeneralState(d1p, d2p, d3p, d1m, d2m, d3m), constraint


def rhs_su23(s: StateSU23, a1: float, b1: float, da1: float) -> StateSU23:
    """Rates of the (x, y) system on the triply symmetric profile."""
    if a1 <= 0:
        raise DomainError("the (x, y) system needs A_1 > 0; use a series seed at the orbit")
    x, y = s.x, s.y
    return StateSU23(
        (da1 / a1) * x + y * y - x * x,
        ((2 * da1 - 3.0) / a1) * y + 2 * x * y,
    )


def rhs_fg(s: StateFG, H: float) -> StateFG:
    """F' = -G^2 and G' = (H - F) G; H = 0 on the conical profile."""
    return StateFG(-s.G * s.G, (H - s.F) * s.G, s.c_first_integral)


def h_of_r(r: float) -> float:
    """The drift coefficient H(r) = 1 - (5(r - 9/20)^2 - 27/10)/(2 r (r-3/4)(r+9/4)).

    Takes values in (0, 1), increases, and tends to 1; H(9/4) = 5/9.  The
    factor 2 in the denominator is forced by the defining combination of
    profile values (:func:`h_from_profile`), by the series limit at the
    singular orbit, and by the transport identity G' = (H - F) G against the
    four-function system; see the rational derivation in the test suite.
    """
    if r < 2.25:
        raise DomainError("H is defined for r >= 9/4")
    num = 5.0 * (r - 0.45) ** 2 - 2.7
    den = 2.0 * r * (r - 0.75) * (r + 2.25)
    return 1.0 - num / den


def h_from_profile(m: MetricProfile) -> float:
    """H from its defining combination of profile values (cross-check route)."""
    a1, a2, b1, b2 = m.a1, m.a2, m.b1, m.b2
    if a1 <= 0:
        raise DomainError("profile route to H needs A_1 > 0")
    return 0.5 * (2.0 / (a1 * a1) + 1.0 / (b2 * b2)
                  - (a2 * a2 + b1 * b1 + b2 * b2) / (a1 * a2 * b1 * b2))


# ---------------------------------------------------------------------------
# Abelian (gauge group U(1)) solutions


def abelian_rates(m: MetricProfile) -> tuple:
    """Linear decay rates: da_i+ = -rp_i a_i+, da_i- = -rm_i a_i-."""
    A = (m.a1, m.a2, m.a3)
    B = (m.b1, m.b2, m.b3)
    rp = []
    rm = []
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        rp.append(A[i] / (B[j] * B[k]) - A[i] / (A[j] * A[k]))
        rm.append(B[i] / (B[j] * A[k]) + B[i] / (A[j] * B[k]))
    return tuple(rp), tuple(rm)


def abelian_solution(model: str, t0: float, init: AbelianState, t: float,
                     cmap: CoordinateMap | None = None) -> AbelianState:
    """Propagate the six decoupled linear equations from t0 to t.

    Each coefficient is init * exp(-integral of its rate); the integrals are
    evaluated by adaptive quadrature in the radial coordinate, reusing the
    coordinate map rather than re-integrating t(r) per call.
    """
    cmap = cmap or coordinate_map(model)
    r0 = cmap.r_of_t(t0)
    r1 = cmap.r_of_t(t)

    def exponent(which: int) -> float:
        def integrand(r):
            p = profile(model, r)
            rp, rm = abelian_rates(p)
            rate = rp[which] if which < 3 else rm[which - 3]
            return rate / drdt(model, r)

        val, _ = quad(integrand, r0, r1, epsabs=1e-13, epsrel=1e-12, limit=200)
        return val

    vals = init.as_array()
    out = []
    for i in range(6):
        if vals[i] == 0.0:
            out.append(0.0)
        else:
            out.append(vals[i] * math.exp(-exponent(i)))
    return AbelianState(*out)


def abelian_profile(model: str, component: str, r: float) -> float:
    """Closed-form radial profile of the extendable abelian families.

    For the conical model every a_i+ is proportional to (r^3 - 1)/r.  On the
    ALC model a_1+ is proportional to A_1^2 and a_2+, a_3+ to
    (r - 9/4) e^r / (sqrt(r) (r + 9/4)^2).
    """
    if model == "BS":
        return (r ** 3 - 1.0) / r
    if component == "1":
        return (r - 2.25) * (r + 2.25) / ((r - 0.75) * (r + 0.75))
    return (r - 2.25) * math.exp(r) / (math.sqrt(r) * (r + 2.25) ** 2)


def abelian_profile_dr(model: str, component: str, r: float) -> float:
    """d/dr of :func:`abelian_profile` (analytic, for independent residual checks)."""
    if model == "BS":
        return (2.0 * r ** 3 + 1.0) / (r * r)
    if component == "1":
        v = r * r - 0.5625
        return 9.0 * r / (v * v)
    val = abelian_profile(model, component, r)
    return val * (1.0 / (r - 2.25) + 1.0 - 0.5 / r - 2.0 / (r + 2.25))


# ---------------------------------------------------------------------------
# Closed-form irreducible solutions on the conical profile


def clarke_pole(x1: float) -> float | None:
    """Radial pole of the concentrating family for x1 < 0, else None."""
    if x1 >= 0:
        return None
    return math.sqrt(1.0 - 3.0 / x1)


def clarke_closed_form(x1: float, r: float) -> StateSU23:
    """The concentrating one-parameter family: x(r) = 2 x1 r sqrt(1-r^-3) / (3 + x1(r^2-1)).

    Globally defined exactly when x1 >= 0; for x1 < 0 the state is only
    defined below the pole of the denominator.
    """
    if r < 1.0:
        raise DomainError("needs r >= 1")
    pole = clarke_pole(x1)
    if pole is not None and r >= pole:
        raise DomainError(f"x1 = {x1} blows up at r = {pole}; requested r = {r}")
    rho = math.sqrt(max(1.0 - r ** -3, 0.0))
    return StateSU23(2.0 * x1 * r * rho / (3.0 + x1 * (r * r - 1.0)), 0.0)


def clarke_w(x1, r):
    """A_1 x of the concentrating family: 2 x1 (r^3 - 1) / (3 r (3 + x1 (r^2 - 1)))."""
    P = 3 + x1 * (r * r - 1)
    return 2 * x1 * (r ** 3 - 1) / (3 * r * P)


def clarke_w_dr(x1, r):
    """d/dr of :func:`clarke_w` (exact rational arithmetic when inputs are exact)."""
    P = 3 + x1 * (r * r - 1)
    num = 3 * r ** 3 * P - (r ** 3 - 1) * (P + 2 * x1 * r * r)
    return 2 * x1 * num / (3 * r * r * P * P)


def alim_closed_form(r: float) -> StateSU23:
    """The bubbling-limit solution: x(r) = 2 r sqrt(1 - r^-3) / (r^2 - 1), y = 0."""
    if r <= 1.0:
        raise DomainError("needs r > 1 (removable at r = 1 through the series seed)")
    rho = math.sqrt(1.0 - r ** -3)
    return StateSU23(2.0 * r * rho / (r * r - 1.0), 0.0)


def alim_w(r):
    """A_1 x of the limit solution: 2 (r^2 + r + 1) / (3 r (r + 1)); tends to 1 at r = 1."""
    return 2 * (r * r + r + 1) / (3 * r * (r + 1))


def alim_w_dr(r):
    D = r * r + r
    return -2 * (2 * r + 1) / (3 * D * D)


# ---------------------------------------------------------------------------
# Trajectory drivers (radial coordinate marched alongside the state)


def integrate_full(model: str, t0: float, r0: float, state0: StateFull,
                   t_end: float, control: StepControl | None = None,
                   conserved=None) -> Trajectory:
    """March (r, f+, g+, f-, g-) in t; metric values are exact at every stage."""
    ctrl = control or StepControl()
    r_floor = 1.0 if model == "BS" else 2.25

    def rhs(_t, y):
        r = max(y[0], r_floor)
        m = profile(model, r)
        d = rhs_full(StateFull(y[1], y[2], y[3], y[4]), m)
        return np.array([drdt(model, r), d.f_plus, d.g_plus, d.f_minus, d.g_minus])

    y0 = np.array([r0, state0.f_plus, state0.g_plus, state0.f_minus, state0.g_minus])
    return integrate(rhs, y0, (t0, t_end), ctrl,
                     names=("r", "f+", "g+", "f-", "g-"), conserved=conserved)


def integrate_su23(t0: float, r0: float, state0: StateSU23, t_end: float,
                   control: StepControl | None = None) -> Trajectory:
    """March (r, x, y) in t on the conical profile."""
    ctrl = control or StepControl()

    def rhs(_t, y):
        r = max(y[0], 1.0)
        m = profile("BS", r)
        d = rhs_su23(StateSU23(y[1], y[2]), m.a1, m.b1, m.da1)
        return np.array([drdt("BS", r), d.x, d.y])

    return integrate(rhs, np.array([r0, state0.x, state0.y]), (t0, t_end), ctrl,
                     names=("r", "x", "y"))


def integrate_fg(model: str, F0: float, G0: float, s_end: float,
                 control: StepControl | None = None, *,
                 with_t: bool = False, detect: bool = True) -> Trajectory:
    """March (F, G) in the flow parameter s, optionally carrying t alongside.

    The first integral F^2 - G^2 is recorded on the conical model, whose H
    vanishes; exponential growth of G is detected when ``detect`` is set.
    """
    ctrl = control or StepControl()

    if model == "BS":
        def hval(_s):
            return 0.0

        conserved = lambda y: y[0] * y[0] - y[1] * y[1]  # noqa: E731
    else:
        def hval(s):
            return h_of_r(s + 2.25)

        conserved = None

    if with_t:
        # dt/ds = 1/A_1 ~ s^(-1/2) at the orbit, so start a hair inside with
        # t0 = 2 sqrt(s0); the offset is O(s0) and irrelevant for tail fits.
        s0 = 1e-6

        def rhs(s, y):
            s = max(s, 0.5 * s0)
            H = hval(s)
            r = math.sqrt(1.0 + 6.0 * s) if model == "BS" else s + 2.25
            a1 = profile(model, r).a1
            return np.array([-y[1] * y[1], (H - y[0]) * y[1], 1.0 / a1])

        y0 = [F0, G0, 2.0 * math.sqrt(s0)]
        names = ("F", "G", "t")
        return integrate(rhs, y0, (s0, s_end), ctrl, names=names,
                         growth_component=1 if detect else None,
                         conserved=conserved)
    else:
        def rhs(s, y):
            H = hval(max(s, 0.0))
            return np.array([-y[1] * y[1], (H - y[0]) * y[1]])

        y0 = [F0, G0]
        names = ("F", "G")

    return integrate(rhs, y0, (0.0, s_end), ctrl, names=names,
                     growth_component=1 if detect else None,
                     conserved=conserved)
