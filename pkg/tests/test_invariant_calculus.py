"""Exact exterior-algebra checks: these all run in rational arithmetic."""

import math
from fractions import Fraction

import pytest

from g2inst.detrand import DetRand
from g2inst.invariant_calculus import (
    DomainError,
    InvariantForm,
    LieValue,
    SpacetimeForm,
    basis_forms,
    bracket_wedge,
    coframe,
    connection_form,
    curvature,
    curvature_reference,
    d_invariant,
    hitchin_residual,
    hodge_star,
    instanton_residual,
    norm_squared,
    sasaki_einstein_check,
    su3_structure,
    su3_structure_dot,
    volume_form,
    wedge,
)
from g2inst.metrics import bggg_profile, bs_profile

T1, T2, T3 = (LieValue.basis_T(i) for i in (1, 2, 3))
ZERO3 = [LieValue.su2(0, 0, 0)] * 3


def rand_profile(rng):
    from g2inst.metrics import MetricProfile
    vals = [rng.uniform(0.3, 3.0) for _ in range(6)]
    return MetricProfile(*vals)


class TestWedge:
    def test_antisymmetry_on_generators(self):
        e1p = coframe(1, "+")
        assert wedge(e1p, e1p).is_zero

    def test_sign_rule(self):
        e1p, e2p = coframe(1, "+"), coframe(2, "+")
        assert (wedge(e1p, e2p) + wedge(e2p, e1p)).is_zero
        assert wedge(e1p, e2p).coefficient((0, 1)) == LieValue.scalar(Fraction(1))

    def test_bilinearity(self):
        e1p, e1m, e2m = coframe(1, "+"), coframe(1, "-"), coframe(2, "-")
        lhs = wedge(e1p + e1m, e2m)
        rhs = wedge(e1p, e2m) + wedge(e1m, e2m)
        assert (lhs - rhs).is_zero

    def test_degree_overflow_raises(self):
        five = InvariantForm.build(5, {(0, 1, 2, 3, 4): Fraction(1)})
        two = InvariantForm.build(2, {(0, 5): Fraction(1)})
        with pytest.raises(DomainError):
            wedge(five, two)

    def test_su2_su2_wedge_rejected(self):
        a = InvariantForm.build(1, {(0,): T1})
        with pytest.raises(DomainError):
            wedge(a, a)


class TestBracketWedge:
    def test_same_generator_vanishes(self):
        a = InvariantForm.build(1, {(0,): T1})
        b = InvariantForm.build(1, {(1,): T1})
        assert bracket_wedge(a, b).is_zero

    def test_double_sum_gives_four(self):
        # [a ^ a] for a = T2 (x) eta2+ + T3 (x) eta3+ picks up both orderings
        a = InvariantForm.build(1, {(1,): T2, (2,): T3})
        out = bracket_wedge(a, a)
        assert (out.coefficient((1, 2)) - T1.scale(4)).is_zero

    def test_canonical_connection_bracket(self):
        a = connection_form((T1, T2, T3), ZERO3)
        out = bracket_wedge(a, a)
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            want = LieValue.basis_T(i + 1).scale(4)
            assert (out.coefficient((j, k)) - want).is_zero

    def test_scalar_input_rejected(self):
        with pytest.raises(DomainError):
            bracket_wedge(coframe(1, "+"), coframe(2, "+"))


class TestExteriorDerivative:
    def test_d_eta1_plus(self):
        want = InvariantForm.build(
            2, {(1, 2): Fraction(-2), (4, 5): Fraction(-2)})
        assert (d_invariant(coframe(1, "+")) - want).is_zero

    def test_d_eta1_minus(self):
        # d eta1- = -2(eta2- ^ eta3+ + eta2+ ^ eta3-)
        want = InvariantForm.build(
            2, {(4, 2): Fraction(-2), (1, 5): Fraction(-2)})
        assert (d_invariant(coframe(1, "-")) - want).is_zero

    def test_d_squared_zero_on_basis(self):
        for k in range(7):
            for f in basis_forms(k):
                assert d_invariant(d_invariant(f)).is_zero

    def test_d_squared_zero_on_random_forms(self):
        rng = DetRand(11)
        for _ in range(25):
            f = InvariantForm.build(2, {
                (0, 3): rng.fraction(), (1, 2): rng.fraction(),
                (2, 4): rng.fraction(), (0, 5): rng.fraction()})
            assert d_invariant(d_invariant(f)).is_zero

    def test_values_pass_through(self):
        a = InvariantForm.build(1, {(0,): T2})
        d = d_invariant(a)
        assert (d.coefficient((1, 2)) - T2.scale(-2)).is_zero


class TestHodge:
    def test_quoted_orientation_identity(self):
        m = bs_profile(2.0)
        f = InvariantForm.build(5, {(3, 4, 5, 1, 2): 8.0})
        got = hodge_star(f, m).coefficient((0,)).comps[0]
        want = -0.5 * m.a1 / (m.a2 * m.a3 * m.b1 * m.b2 * m.b3)
        assert got == pytest.approx(want, rel=1e-14)

    def test_mirror_identity(self):
        m = bggg_profile(3.0)
        f = InvariantForm.build(5, {(0, 1, 2, 4, 5): 8.0})
        got = hodge_star(f, m).coefficient((3,)).comps[0]
        want = 0.5 * m.b1 / (m.b2 * m.b3 * m.a1 * m.a2 * m.a3)
        assert got == pytest.approx(want, rel=1e-14)

    def test_star_star_sign_law_random_metrics(self):
        rng = DetRand(3)
        for _ in range(5):
            m = rand_profile(rng)
            for k in range(7):
                for f in basis_forms(k):
                    diff = hodge_star(hodge_star(f, m), m) - f.scale((-1) ** (k * (6 - k)))
                    assert all(abs(float(c)) < 1e-12
                               for v in diff.coeffs.values() for c in v.comps)

    def test_norm_from_wedge(self):
        m = bs_profile(2.0)
        e1p = coframe(1, "+")
        top = wedge(e1p, hodge_star(e1p, m)).coefficient((0, 1, 2, 3, 4, 5))
        vol = volume_form(m).coefficient((0, 1, 2, 3, 4, 5))
        assert float(top.comps[0] / vol.comps[0]) == pytest.approx(1 / (4 * m.a1 ** 2))

    def test_degenerate_metric_rejected(self):
        m = bs_profile(1.0)   # A_i = 0 at the singular orbit
        with pytest.raises(DomainError):
            hodge_star(coframe(1, "+"), m)


class TestStructureForms:
    def test_omega_wedge_omega2_vanishes(self):
        m = bggg_profile(3.7)
        om, _, om2 = su3_structure(m)
        assert wedge(om, om2).is_zero

    def test_volume_normalization(self):
        # the explicit family satisfies omega^3 = 6 vol and Omega1 ^ Omega2 = 4 vol,
        # i.e. omega^3 = (3/2) Omega1 ^ Omega2
        m = bs_profile(2.0)
        om, o1, o2 = su3_structure(m)
        om3 = wedge(wedge(om, om), om).coefficient((0, 1, 2, 3, 4, 5)).comps[0]
        o1o2 = wedge(o1, o2).coefficient((0, 1, 2, 3, 4, 5)).comps[0]
        vol = volume_form(m).coefficient((0, 1, 2, 3, 4, 5)).comps[0]
        assert float(om3 / vol) == pytest.approx(6.0, rel=1e-13)
        assert float(om3 / o1o2) == pytest.approx(1.5, rel=1e-13)

    def test_bs_coefficients_at_r2(self):
        m = bs_profile(2.0)
        a = (2.0 / 3.0) * math.sqrt(7.0 / 8.0)
        b = 2.0 / math.sqrt(3.0)
        assert m.a1 == pytest.approx(a, rel=1e-15)
        assert m.b1 == pytest.approx(b, rel=1e-15)
        om, _, _ = su3_structure(m)
        assert float(om.coefficient((3, 0)).comps[0]) == pytest.approx(4 * a * b)


class TestCurvature:
    def test_lemma_equals_d_plus_bracket_exact(self):
        rng = DetRand(7)
        for _ in range(100):
            ap = [LieValue.su2(*rng.su2_fraction_triple()) for _ in range(3)]
            am = [LieValue.su2(*rng.su2_fraction_triple()) for _ in range(3)]
            assert (curvature(ap, am) - curvature_reference(ap, am)).is_zero

    def test_trivial_connection_flat(self):
        assert curvature(ZERO3, ZERO3).is_zero

    def test_product_flat_connections(self):
        # both bracket equalities must hold: a_i+ = T_i needs a_i- = +-T_i
        assert curvature((T1, T2, T3), (T1, T2, T3)).is_zero
        assert curvature((T1, T2, T3),
                         (T1.scale(-1), T2.scale(-1), T3.scale(-1))).is_zero

    def test_canonical_connection_not_flat(self):
        F = curvature((T1, T2, T3), ZERO3)
        assert not F.is_zero
        # its eta_j- ^ eta_k- components are -2 T_i (the plus brackets cancel)
        assert (F.coefficient((4, 5)) - T1.scale(-2)).is_zero
        assert F.coefficient((1, 2)).is_zero

    def test_perturbed_canonical_matches_reference(self):
        F = curvature((T1, T2, T3), (T1, T2.scale(Fraction(1, 2)), T3))
        R = curvature_reference((T1, T2, T3), (T1, T2.scale(Fraction(1, 2)), T3))
        assert (F - R).is_zero


class TestResiduals:
    def test_trivial_connection_zero_residual(self):
        m = bggg_profile(3.0)
        F = curvature(ZERO3, ZERO3)
        assert instanton_residual(F, m, ZERO3, ZERO3) == 0.0

    def test_random_non_solution_positive(self):
        m = bggg_profile(3.0)
        ap = (T1.scale(0.4), T2.scale(0.2), T3.scale(0.2))
        F = curvature(ap, ZERO3)
        assert instanton_residual(F, m, ZERO3, ZERO3) > 1e-3

    def test_hitchin_profile_closed_forms(self):
        for prof in (bs_profile(1.7), bs_profile(9.0), bggg_profile(2.6), bggg_profile(14.0)):
            rep = hitchin_residual(prof)
            assert rep.total < 1e-12

    def test_hitchin_detects_perturbation(self):
        m = bs_profile(2.0)
        bad = type(m)(m.a1, m.a2, m.a3, m.b1, m.b2, m.b3,
                      m.da1 + 0.1, m.da2 + 0.1, m.da3 + 0.1,
                      m.db1, m.db2, m.db3, m.coord, m.coord_value, m.model)
        assert hitchin_residual(bad).flow_total > 1e-3

    def test_spacetime_form_split(self):
        m = bs_profile(2.0)
        om, o1, o2 = su3_structure(m)
        om_dot, o1_dot, _ = su3_structure_dot(m)
        phi = SpacetimeForm(om, o1, om_dot, o1_dot)
        dt_part, slice_part = phi.d()
        assert math.sqrt(norm_squared(dt_part, m)) < 1e-13   # flow equation
        assert slice_part.is_zero or norm_squared(slice_part, m) < 1e-26  # half flat


class TestSasaki:
    def test_all_identities_exact(self):
        rep = sasaki_einstein_check()
        assert rep.passed
        assert rep.d_alpha_plus_2omega1.is_zero
        assert rep.d_omega2_minus_3_alpha_omega3.is_zero
        assert rep.d_omega3_plus_3_alpha_omega2.is_zero

    def test_d_eta_infinity_value(self):
        rep = sasaki_einstein_check()
        want = InvariantForm.build(2, {(1, 2): Fraction(-4), (4, 5): Fraction(-4)})
        assert (rep.d_eta_inf - want).is_zero

    def test_basic_anti_self_dual(self):
        rep = sasaki_einstein_check()
        assert all(f.is_zero for f in rep.d_eta_inf_wedge_omega)
