"""Named verification suites behind the command-line ``verify`` subcommand.

Each suite runs a batch of exact or toleranced checks and returns
(name, passed, detail) rows; the acceptance test module drives the same
functions.  All "random" draws come from the deterministic counter
generator, so suites are bit-reproducible.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import analysis, instanton_systems as isys, invariant_calculus as ic, metrics
from .detrand import DetRand
from .integrator import StepControl
from .singular_ivp import (
    extension_check,
    indicial_data,
    seed_for_model,
    seed_su23_p1,
    seed_su23_pid,
)

SUITES = ("calculus", "metrics", "closed-forms", "seeds", "energy", "bubbling", "sasaki")


def run_suite(name: str, **options) -> list:
    fn = {
        "calculus": suite_calculus,
        "metrics": suite_metrics,
        "closed-forms": suite_closed_forms,
        "seeds": suite_seeds,
        "energy": suite_energy,
        "bubbling": suite_bubbling,
        "sasaki": suite_sasaki,
    }.get(name)
    if fn is None:
        raise KeyError(name)
    return fn(**options)


def _check(rows, name, ok, detail=""):
    rows.append((name, bool(ok), detail))


def _max_form_coeff(form) -> float:
    return max((abs(float(c)) for v in form.coeffs.values() for c in v.comps),
               default=0.0)


# ---------------------------------------------------------------------------


def suite_calculus() -> list:
    rows: list = []
    bad = sum(
        0 if ic.d_invariant(ic.d_invariant(f)).is_zero else 1
        for k in range(7) for f in ic.basis_forms(k)
    )
    _check(rows, "d.d = 0 on all 64 basis forms", bad == 0, f"{bad} failures")

    rng = DetRand(101)
    ok = True
    for _ in range(20):
        f = ic.InvariantForm.build(2, {(0, 1): rng.fraction(), (1, 4): rng.fraction(),
                                       (2, 5): rng.fraction(), (3, 4): rng.fraction()})
        if not ic.d_invariant(ic.d_invariant(f)).is_zero:
            ok = False
    _check(rows, "d.d = 0 on random exact 2-forms", ok)

    m = metrics.bs_profile(1.9)
    ok = True
    for k in range(7):
        for f in ic.basis_forms(k):
            diff = ic.hodge_star(ic.hodge_star(f, m), m) - f.scale((-1) ** (k * (6 - k)))
            if _max_form_coeff(diff) > 1e-12:
                ok = False
    _check(rows, "star.star = (-1)^{k(6-k)} id on all basis forms", ok)

    star = ic.hodge_star(ic.InvariantForm.build(5, {(3, 4, 5, 1, 2): 8.0}), m)
    want = -0.5 * m.a1 / (m.a2 * m.a3 * m.b1 * m.b2 * m.b3)
    got = float(star.coefficient((0,)).comps[0])
    _check(rows, "orientation: star(8 eta123- ^ eta23+) = -(1/2) A1/(A2A3B1B2B3) eta1+",
           abs(got - want) < 1e-14 * abs(want), f"{got} vs {want}")

    rng = DetRand(7)
    ok = True
    for _ in range(100):
        ap = [ic.LieValue.su2(*rng.su2_fraction_triple()) for _ in range(3)]
        am = [ic.LieValue.su2(*rng.su2_fraction_triple()) for _ in range(3)]
        if not (ic.curvature(ap, am) - ic.curvature_reference(ap, am)).is_zero:
            ok = False
    _check(rows, "curvature via d + (1/2)[a^a] = cyclic closed formula, 100 exact draws", ok)

    T = [ic.LieValue.basis_T(i) for i in (1, 2, 3)]
    _check(rows, "product flat connection (T_i, T_i) has F = 0",
           ic.curvature(T, T).is_zero and ic.curvature(T, [v.scale(-1) for v in T]).is_zero)

    # constraint 3-form: F_a ^ omega^2/2 vanishes identically on the ansatz
    rng = DetRand(23)
    ok = True
    for _ in range(10):
        fp, gp, fm, gm = (rng.uniform(-2, 2) for _ in range(4))
        mm = metrics.bggg_profile(2.3 + rng.uniform(0, 8))
        ap = (T[0].scale(mm.a1 * fp), T[1].scale(mm.a2 * gp), T[2].scale(mm.a3 * gp))
        am = (T[0].scale(mm.b1 * fm), T[1].scale(mm.b2 * gm), T[2].scale(mm.b3 * gm))
        F = ic.curvature(ap, am)
        om, _, _ = ic.su3_structure(mm)
        res = ic.wedge(F, ic.wedge(om, om).scale(0.5))
        if math.sqrt(ic.norm_squared(res, mm)) > 1e-12:
            ok = False
    _check(rows, "constraint 3-form F_a ^ omega^2/2 = 0 on the one-T_i ansatz", ok)

    four = ic.bracket_wedge(
        ic.InvariantForm.build(1, {(1,): T[1]}) + ic.InvariantForm.build(1, {(2,): T[2]}),
        ic.InvariantForm.build(1, {(1,): T[1]}) + ic.InvariantForm.build(1, {(2,): T[2]}),
    )
    _check(rows, "[a ^ a] sums both orderings: coefficient 4 T1 on eta23+",
           (four.coefficient((1, 2)) - T[0].scale(4)).is_zero)

    eigs = {
        ("P1", "SU2xU1"): (-6, -6, -2, -2),
        ("Pid", "SU2xU1"): (-8, -6, -3, -2),
        ("P1", "SU23"): (-6, -2),
        ("Pid", "SU23"): (-4, -2),
    }
    for case, want in eigs.items():
        data = indicial_data(*case)
        _check(rows, f"indicial eigenvalues {case} = {want}, admissible",
               data.eigenvalues == want and data.admissible,
               str(data.eigenvalues))
    return rows


def suite_metrics(n_samples: int = 50) -> list:
    rows: list = []
    for model, lo in (("BS", 1.02), ("BGGG", 2.27)):
        rs = np.linspace(lo, 40.0, n_samples)
        worst_ode = 0.0
        worst_flow = 0.0
        for r in rs:
            p = metrics.profile(model, r)
            d6 = metrics.metric_ode_rhs(p)
            worst_ode = max(worst_ode, abs(d6[0] - p.da1), abs(d6[1] - p.da2),
                            abs(d6[3] - p.db1), abs(d6[4] - p.db2))
            worst_flow = max(worst_flow, ic.hitchin_residual(p).total)
        _check(rows, f"{model} closed form satisfies the metric ODEs at {n_samples} points",
               worst_ode < 1e-10, f"max residual {worst_ode:.3e}")
        _check(rows, f"{model} satisfies the full slice-evolution form equations",
               worst_flow < 1e-10, f"max residual {worst_flow:.3e}")

    # series seeds against the two closed-form examples
    p = metrics.taylor_seed_metric(*metrics.BS_SEED, t=0.05)
    q = metrics.taylor_seed_metric(*metrics.BGGG_SEED, t=0.05)
    _check(rows, "series seed reproduces t/2 - t^3/8 and b + sqrt(3) t^2/4 (conical data)",
           abs(p.a1 - (0.025 - 0.05 ** 3 / 8 + 0.15 * 0.05 ** 5)) < 1e-15
           and abs(p.b1 - (1 / math.sqrt(3) + math.sqrt(3) / 4 * 0.0025
                           - math.sqrt(3) / 8 * 0.05 ** 4)) < 1e-15)
    c2 = metrics.series_c2_coefficient(Fraction(9, 4), Fraction(-7, 108))
    _check(rows, "cubic coefficient of A2: 1/216 (ALC) and -1/8 (conical)",
           c2 == Fraction(1, 216)
           and metrics.series_c2_coefficient(Fraction(1, 3), Fraction(-1, 8)) == Fraction(-1, 8),
           str(c2))
    _check(rows, "ALC seed matches b = 3/2 with A2 = t/2 + t^3/216",
           abs(q.b1 - (1.5 + 0.0025 / 6 - 7 / 648 * 0.05 ** 4)) < 1e-15
           and abs(q.a2 - (0.025 + 0.05 ** 3 / 216 - 11 / 19440 * 0.05 ** 5)) < 1e-15)

    # series-seeded integration against the closed forms
    for model, seed in (("BS", metrics.BS_SEED), ("BGGG", metrics.BGGG_SEED)):
        traj = metrics.integrate_metric(seed[0], seed[1], 5.0)
        cmap = metrics.coordinate_map(model)
        worst = 0.0
        for t in np.linspace(0.5, 5.0, 10):
            a1, a2, b1, b2 = traj.sample(t)
            p = metrics.profile(model, cmap.r_of_t(t))
            worst = max(worst, abs(a1 / p.a1 - 1), abs(a2 / p.a2 - 1),
                        abs(b1 / p.b1 - 1), abs(b2 / p.b2 - 1))
        _check(rows, f"{model} seed integration matches the closed form to 1e-8",
               worst < 1e-8, f"max rel err {worst:.3e}")

    cmap = metrics.coordinate_map("BS")
    rt = max(abs(cmap.r_of_t(cmap.t_of_r(r)) - r) for r in (1.0, 1.5, 3.0, 10.0, 50.0))
    _check(rows, "coordinate map round trip r(t(r)) = r to 1e-10", rt < 1e-10, f"{rt:.3e}")
    _check(rows, "t(1) = 0 at the singular orbit", cmap.t_of_r(1.0) == 0.0)
    tail = abs((cmap.t_of_r(300.0) - 300.0) - (cmap.t_of_r(150.0) - 150.0))
    _check(rows, "t(r) - r approaches a constant at infinity", tail < 1e-3, f"{tail:.2e}")
    return rows


def suite_closed_forms(n_slices: int = 20) -> list:
    rows: list = []
    T = [ic.LieValue.basis_T(i) for i in (1, 2, 3)]
    Z = [ic.LieValue.su2(0, 0, 0)] * 3

    def unreduced(model, r, coeffs_plus, coeffs_minus, dplus, dminus):
        prof = metrics.profile(model, r)
        ap = [T[i].scale(coeffs_plus[i]) for i in range(3)]
        am = [T[i].scale(coeffs_minus[i]) for i in range(3)] if coeffs_minus else Z
        F = ic.curvature(ap, am)
        adp = [T[i].scale(dplus[i]) for i in range(3)]
        adm = [T[i].scale(dminus[i]) for i in range(3)] if dminus else Z
        return ic.instanton_residual(F, prof, adp, adm)

    rs = np.linspace(1.35, 30.0, n_slices)
    for x1 in (0.1, 1.0, 10.0):
        worst = 0.0
        for r in rs:
            w = isys.clarke_w(x1, r)
            dwdt = isys.clarke_w_dr(x1, r) * metrics.drdt("BS", r)
            worst = max(worst, unreduced("BS", r, (w, w, w), None, (dwdt,) * 3, None))
        _check(rows, f"concentrating family x1={x1}: unreduced 7d residual at {n_slices} slices",
               worst < 1e-9, f"max {worst:.3e}")

    worst = 0.0
    for r in rs:
        w = isys.alim_w(r)
        dwdt = isys.alim_w_dr(r) * metrics.drdt("BS", r)
        worst = max(worst, unreduced("BS", r, (w, w, w), None, (dwdt,) * 3, None))
    _check(rows, "limit solution: unreduced 7d residual", worst < 1e-9, f"max {worst:.3e}")

    def abelian_res(model, rs_, xs):
        comp = ("1", "23", "23") if model == "BGGG" else ("1", "1", "1")
        worst = 0.0
        for r in rs_:
            prof = metrics.profile(model, r)
            ap = [T[0].scale(xs[i] * isys.abelian_profile(model, comp[i], r)) for i in range(3)]
            F = ic.curvature(ap, Z)
            adp = [T[0].scale(xs[i] * isys.abelian_profile_dr(model, comp[i], r)
                              * metrics.drdt(model, r)) for i in range(3)]
            worst = max(worst, ic.instanton_residual(F, prof, adp, Z))
        return worst

    worst = abelian_res("BS", rs, (1.0, 0.5, 0.25))
    _check(rows, "conical abelian family: unreduced residual", worst < 1e-9, f"max {worst:.3e}")
    worst = abelian_res("BGGG", np.linspace(2.35, 10.0, n_slices), (1.0, 1.0, 0.5))
    _check(rows, "ALC abelian family: unreduced residual", worst < 1e-9, f"max {worst:.3e}")

    worst = 0.0
    for r in np.linspace(2.3, 50, 40):
        worst = max(worst, abs(isys.h_of_r(r) - isys.h_from_profile(metrics.bggg_profile(r))))
    _check(rows, "drift coefficient H: closed form = defining combination",
           worst < 1e-11, f"max {worst:.3e}")
    hs = [isys.h_of_r(r) for r in np.linspace(2.25, 2000, 400)]
    _check(rows, "H(9/4) = 5/9, increasing, in (0,1), limit 1",
           abs(hs[0] - 5 / 9) < 1e-14
           and all(a < b for a, b in zip(hs, hs[1:]))
           and all(0 < h < 1 for h in hs) and hs[-1] > 0.99,
           f"H(9/4) = {hs[0]}")

    cmap = metrics.coordinate_map("BS")
    t0, t1 = cmap.t_of_r(2.0), cmap.t_of_r(6.0)
    st = isys.abelian_solution("BS", t0, isys.AbelianState(1, 0.5, 0.25, 0, 0, 0), t1, cmap)
    want = isys.abelian_profile("BS", "1", 6.0) / isys.abelian_profile("BS", "1", 2.0)
    _check(rows, "conical abelian quadrature matches (r^3-1)/r to 1e-8",
           abs(st.a1p / want - 1) < 1e-8 and abs(st.a2p / 0.5 / want - 1) < 1e-8)
    cmapg = metrics.coordinate_map("BGGG")
    t0, t1 = cmapg.t_of_r(2.5), cmapg.t_of_r(7.0)
    st = isys.abelian_solution("BGGG", t0, isys.AbelianState(1, 1, 0, 0, 0, 0), t1, cmapg)
    want = isys.abelian_profile("BGGG", "23", 7.0) / isys.abelian_profile("BGGG", "23", 2.5)
    _check(rows, "ALC abelian quadrature matches (r-9/4)e^r/(sqrt r (r+9/4)^2) to 1e-8",
           abs(st.a2p / want - 1) < 1e-8)
    return rows


def suite_seeds() -> list:
    rows: list = []
    sd = seed_for_model("BGGG", "P1", f1=Fraction(1), g1=Fraction(0))
    _check(rows, "P1 seed (ALC, f1=1, g1=0): u1(0) = -7/54",
           sd.derived["u1_0"] == Fraction(-7, 54), str(sd.derived["u1_0"]))
    sd = seed_su23_p1(Fraction(1))
    _check(rows, "triply symmetric P1 seed: u(0) = -x1/4 - x1^2/2 (exact)",
           sd.derived["u1_0"] == Fraction(-3, 4) == sd.derived["u2_0"])
    sd = seed_su23_pid(Fraction(0))
    _check(rows, "Pid seed y0=0: linear coefficient -1/4 and u(0) = -1217/1920",
           sd.derived["u_0"] == Fraction(-1217, 1920) and sd.derived["v_0"] == 0)
    sd = seed_su23_pid(Fraction(1, 2))
    _check(rows, "Pid seed y0=1/2: v(0) = (y0/2)(y0^2/2 - 3)",
           sd.derived["v_0"] == Fraction(1, 4) * (Fraction(1, 8) - 3))
    roots = [b0 for b0 in (0.0, math.sqrt(6), -math.sqrt(6))
             if abs(float(seed_su23_pid(b0).derived["v_0"])) < 1e-13]
    _check(rows, "v(0) vanishes exactly at b0 in {0, +-sqrt(2)/b}", len(roots) == 3)

    cmap = metrics.coordinate_map("BS")
    ctrl = StepControl(rel_tol=1e-12, abs_tol=1e-14, max_step=0.5)
    worst = 0.0
    for x1 in (0.5, 1.0, 2.0):
        sd = seed_su23_p1(x1)
        tr = isys.integrate_full("BS", sd.t_start, cmap.r_of_t(sd.t_start),
                                 sd.state_at(sd.t_start), 10.0, ctrl)
        xc = isys.clarke_closed_form(x1, tr.final_state[0]).x
        worst = max(worst, abs(tr.final_state[1] - xc) / abs(xc))
    _check(rows, "P1 seed integration reproduces the concentrating family to 1e-8 at t=10",
           worst < 1e-8, f"max rel err {worst:.3e}")

    sd = seed_su23_pid(0.0)
    tr = isys.integrate_su23(sd.t_start, cmap.r_of_t(sd.t_start),
                             sd.su23_state_at(sd.t_start), 10.0, ctrl)
    xa = isys.alim_closed_form(tr.final_state[0]).x
    err = abs(tr.final_state[1] - xa) / abs(xa)
    _check(rows, "Pid seed (y0=0) integration reproduces the limit solution to 1e-8 at t=10",
           err < 1e-8, f"rel err {err:.3e}")

    # extension verdicts from backward tails
    ts = [0.02, 0.04, 0.08, 0.16]
    states = [isys.StateFull(isys.clarke_closed_form(1.0, cmap.r_of_t(t)).x,
                             isys.clarke_closed_form(1.0, cmap.r_of_t(t)).x, 0.0, 0.0)
              for t in ts]
    _check(rows, "concentrating-family tail passes the P1 extension conditions",
           extension_check(ts, states, "P1").passed)
    states = [isys.StateFull(isys.alim_closed_form(cmap.r_of_t(t)).x,
                             isys.alim_closed_form(cmap.r_of_t(t)).x, 0.0, 0.0)
              for t in ts]
    _check(rows, "limit-solution tail passes the Pid extension conditions",
           extension_check(ts, states, "Pid").passed)
    t0 = 0.16
    st0 = isys.AbelianState(0, 0, 0, 1.0, 0, 0)
    states = []
    for t in ts:
        a = isys.abelian_solution("BS", t0, st0, t, cmap)
        b1 = metrics.profile("BS", cmap.r_of_t(t)).b1
        states.append(isys.StateFull(0.0, 0.0, a.a1m / b1, 0.0))
    rep = extension_check(ts, states, "P1")
    _check(rows, "abelian minus-coefficient tail fails extension (quartic divergence)",
           not rep.passed)
    return rows


def suite_energy(x1: float = 1e4) -> list:
    rows: list = []
    q = analysis.q_expansion()
    _check(rows, "energy-coefficient oracle: q[2,0] = 2592 and q[3,0] = q[3,1] = 0",
           q[(2, 0)] == 2592 and q[(3, 0)] == 0 and q[(3, 1)] == 0,
           f"q20 = {q[(2, 0)]}")
    vals = [analysis.energy_difference(x, 100.0) for x in (1e2, 1e3, x1)]
    errs = [abs(v - analysis.ENERGY_LIMIT) for v in vals]
    _check(rows, "energy sequence x1 = 1e2, 1e3, 1e4 approaches the limit monotonically",
           errs[0] > errs[1] > errs[2], f"errors {errs}")
    _check(rows, f"energy at x1={x1:g} within 2% of the limit {analysis.ENERGY_LIMIT:.4f}",
           errs[-1] < 0.02 * analysis.ENERGY_LIMIT, f"value {vals[-1]:.4f}")
    return rows


def suite_bubbling() -> list:
    rows: list = []
    c, resid, table = analysis.bubbling_grid_fit(
        (1e2, 1e3, 1e4, 1e5), (0.05, 0.1, 0.15, 0.2))
    _check(rows, "sup norm fits c lam^2/x1 on a 4x4 grid with < 10% residual",
           resid < 0.10, f"c = {c:.4f}, residual {resid:.3%}")
    v = analysis.bubbling_compare(1e4, 1.0)
    _check(rows, "value at (lam=1, x1=1e4) below 1e-3", v < 1e-3, f"{v:.3e}")
    seq = [analysis.bubbling_compare(x, 1.0) for x in (10.0, 1e2, 1e3, 1e4)]
    _check(rows, "x1 -> infinity at lam=1 decreases monotonically to 0",
           all(a > b for a, b in zip(seq, seq[1:])), str(seq))
    _check(rows, "lam -> 0 vanishes",
           analysis.bubbling_compare(1e3, 1e-3) < 1e-5)
    return rows


def suite_sasaki() -> list:
    rows: list = []
    rep = ic.sasaki_einstein_check()
    _check(rows, "d alpha + 2 omega1 = 0 (exact)", rep.d_alpha_plus_2omega1.is_zero)
    _check(rows, "d omega2 - 3 alpha ^ omega3 = 0 (exact)",
           rep.d_omega2_minus_3_alpha_omega3.is_zero)
    _check(rows, "d omega3 + 3 alpha ^ omega2 = 0 (exact)",
           rep.d_omega3_plus_3_alpha_omega2.is_zero)
    expected = ic.InvariantForm.build(2, {(1, 2): Fraction(-4), (4, 5): Fraction(-4)})
    _check(rows, "d eta_inf = -4(eta23+ + eta23-) (exact)",
           (rep.d_eta_inf - expected).is_zero)
    _check(rows, "d eta_inf ^ omega_i = 0 for i = 1, 2, 3 (basic anti-self-dual)",
           all(f.is_zero for f in rep.d_eta_inf_wedge_omega))
    return rows
