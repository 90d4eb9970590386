import math
from fractions import Fraction

import numpy as np
import pytest

from g2inst.integrator import StepControl
from g2inst.invariant_calculus import DomainError, hitchin_residual
from g2inst.metrics import (
    BGGG_SEED,
    BS_SEED,
    MetricBlowUpError,
    bggg_profile,
    bs_profile,
    coordinate_map,
    integrate_metric,
    metric_ode_rhs,
    metric_ode_rhs_reduced,
    profile,
    series_c2_coefficient,
    taylor_seed_metric,
    trajectory_profile,
    write_profile_csv,
)

SQ3 = math.sqrt(3.0)


class TestClosedFormProfiles:
    def test_bs_singular_orbit(self):
        p = bs_profile(1.0)
        assert p.a1 == 0.0
        assert p.b1 == pytest.approx(1 / SQ3)
        assert p.da1 == pytest.approx(0.5)

    def test_bs_at_r2(self):
        p = bs_profile(2.0)
        assert p.a1 == pytest.approx((2 / 3) * math.sqrt(7 / 8), rel=1e-15)
        assert p.b1 == pytest.approx(2 / SQ3, rel=1e-15)

    def test_bs_domain_error(self):
        with pytest.raises(DomainError):
            bs_profile(0.5)

    def test_bs_ode_residual_50_points(self):
        for r in np.linspace(1.01, 60, 50):
            p = bs_profile(r)
            d = metric_ode_rhs_reduced(p.a1, p.a2, p.b1, p.b2)
            assert abs(d[0] - p.da1) < 1e-12
            assert abs(d[2] - p.db1) < 1e-12

    def test_bggg_singular_orbit(self):
        p = bggg_profile(2.25)
        assert p.a1 == 0.0 and p.a2 == 0.0
        assert p.b1 == pytest.approx(1.5)
        assert p.b2 == pytest.approx(1.5)
        assert p.da1 == pytest.approx(0.5)
        assert p.da2 == pytest.approx(0.5)

    def test_bggg_domain_error(self):
        with pytest.raises(DomainError):
            bggg_profile(2.0)

    def test_bggg_asymptotics(self, cmap_bggg):
        p = bggg_profile(4000.0)
        t = cmap_bggg.t_of_r(4000.0)
        assert p.a1 == pytest.approx(1.0, abs=1e-6)
        assert p.b1 / t == pytest.approx(2 / 3, rel=1e-3)
        assert p.a2 / t == pytest.approx(1 / SQ3, rel=1e-3)

    def test_bggg_ode_residual_50_points(self):
        for r in np.linspace(2.26, 60, 50):
            p = bggg_profile(r)
            d = metric_ode_rhs_reduced(p.a1, p.a2, p.b1, p.b2)
            assert abs(d[0] - p.da1) < 1e-12
            assert abs(d[1] - p.da2) < 1e-12
            assert abs(d[2] - p.db1) < 1e-12
            assert abs(d[3] - p.db2) < 1e-12


class TestGeneralSystem:
    def test_reduced_agrees_with_general(self):
        p = bggg_profile(3.7)
        d6 = metric_ode_rhs(p)
        d4 = metric_ode_rhs_reduced(p.a1, p.a2, p.b1, p.b2)
        assert d6[0] == pytest.approx(d4[0], abs=1e-14)
        assert d6[1] == pytest.approx(d4[1], abs=1e-14)
        assert d6[2] == pytest.approx(d4[1], abs=1e-14)
        assert d6[3] == pytest.approx(d4[2], abs=1e-14)
        assert d6[4] == pytest.approx(d4[3], abs=1e-14)

    def test_symmetry_preservation(self):
        from g2inst.metrics import MetricProfile
        p = MetricProfile(0.7, 0.7, 0.7, 1.2, 1.2, 1.2)
        d6 = metric_ode_rhs(p)
        assert d6[0] == d6[1] == d6[2]
        assert d6[3] == d6[4] == d6[5]

    def test_zero_denominator(self):
        from g2inst.metrics import MetricProfile
        with pytest.raises(DomainError):
            metric_ode_rhs(MetricProfile(0.0, 1, 1, 1, 1, 1))


class TestTaylorSeed:
    def test_bs_example_coefficients(self):
        t = 0.03
        p = taylor_seed_metric(*BS_SEED, t=t)
        assert p.a1 == pytest.approx(t / 2 - t ** 3 / 8 + 0.15 * t ** 5, abs=1e-18)
        assert p.b1 == pytest.approx(1 / SQ3 + SQ3 / 4 * t * t - SQ3 / 8 * t ** 4,
                                     abs=1e-18)

    def test_bggg_example_coefficients(self):
        t = 0.03
        p = taylor_seed_metric(*BGGG_SEED, t=t)
        assert p.a1 == pytest.approx(t / 2 - 7 / 108 * t ** 3 + 503 / 38880 * t ** 5,
                                     abs=1e-18)
        assert p.a2 == pytest.approx(t / 2 + t ** 3 / 216 - 11 / 19440 * t ** 5,
                                     abs=1e-18)
        assert p.b1 == pytest.approx(1.5 + t * t / 6 - 7 / 648 * t ** 4, abs=1e-18)
        assert p.b2 == pytest.approx(1.5 + t * t / 6 - 17 / 1296 * t ** 4, abs=1e-18)

    def test_c2_consistency(self):
        assert series_c2_coefficient(Fraction(9, 4), Fraction(-7, 108)) == Fraction(1, 216)
        assert series_c2_coefficient(Fraction(1, 3), Fraction(-1, 8)) == Fraction(-1, 8)

    def test_b_zero_rejected(self):
        with pytest.raises(DomainError):
            taylor_seed_metric(0.0, -0.1, 0.01)

    def test_seed_matches_finite_difference_c(self, cmap_bs):
        # c is the cubic coefficient of A_1: finite differences on the closed form
        h = 0.02
        vals = []
        for t in (h, 2 * h):
            r = cmap_bs.r_of_t(t)
            vals.append((bs_profile(r).a1 - t / 2) / t ** 3)
        extrap = (4 * vals[0] - vals[1]) / 3  # kill the t^2 correction
        assert extrap == pytest.approx(BS_SEED[1], abs=1e-4)


class TestIntegrateMetric:
    @pytest.mark.parametrize("model,seed", [("BS", BS_SEED), ("BGGG", BGGG_SEED)])
    def test_matches_closed_form(self, model, seed):
        traj = integrate_metric(seed[0], seed[1], 5.0)
        cmap = coordinate_map(model)
        for t in np.linspace(0.4, 5.0, 8):
            got = traj.sample(t)
            p = profile(model, cmap.r_of_t(float(t)))
            for g, w in zip(got, (p.a1, p.a2, p.b1, p.b2)):
                assert abs(g / w - 1) < 1e-8

    def test_bad_span_rejected(self):
        with pytest.raises(DomainError):
            integrate_metric(*BS_SEED, t_end=1e-5)

    def test_blowup_carries_last_t(self):
        # this seed closes up (a profile function crosses zero) before t = 10
        with pytest.raises(MetricBlowUpError) as exc:
            integrate_metric(1.0, 1.0, t_end=10.0)
        assert 0 < exc.value.t_last <= 1.0

    def test_parity_reflection(self):
        # A_i odd, B_i even: the reflected seed solves the system backward
        t0 = 4e-3 / SQ3
        fwd = integrate_metric(*BS_SEED, t_end=2.0, t_start=t0)
        bwd = integrate_metric(*BS_SEED, t_end=-2.0, t_start=-t0)
        f = fwd.sample(1.5)
        g = bwd.sample(-1.5)
        assert g[0] == pytest.approx(-f[0], rel=1e-9)   # A_1 odd
        assert g[1] == pytest.approx(-f[1], rel=1e-9)
        assert g[2] == pytest.approx(f[2], rel=1e-9)    # B_1 even
        assert g[3] == pytest.approx(f[3], rel=1e-9)

    def test_trajectory_profile_hitchin(self):
        traj = integrate_metric(*BGGG_SEED, t_end=3.0)
        p = trajectory_profile(traj, 2.0, "BGGG")
        assert hitchin_residual(p).total < 1e-7


class TestCoordinateMap:
    def test_t_at_orbit_zero(self, cmap_bs, cmap_bggg):
        assert cmap_bs.t_of_r(1.0) == 0.0
        assert cmap_bggg.t_of_r(2.25) == 0.0

    def test_round_trip(self, cmap_bs):
        for r in (1.0, 1.2, 2.0, 8.0, 60.0):
            assert cmap_bs.r_of_t(cmap_bs.t_of_r(r)) == pytest.approx(r, abs=1e-10)

    def test_integrand_tends_to_one(self, cmap_bs):
        d1 = cmap_bs.t_of_r(200.0) - 200.0
        d2 = cmap_bs.t_of_r(400.0) - 400.0
        assert abs(d1 - d2) < 1e-4

    def test_s_coordinate(self, cmap_bs, cmap_bggg):
        assert cmap_bs.s_of_r(3.0) == pytest.approx((9 - 1) / 6)
        assert cmap_bs.r_of_s(cmap_bs.s_of_r(3.0)) == pytest.approx(3.0)
        assert cmap_bggg.s_of_r(3.0) == pytest.approx(0.75)

    def test_r_on_grid(self, cmap_bs):
        # the marched table is a convenience; the quadrature inversion is the
        # precision route, so a few 1e-9 of drift through the sqrt region is fine
        ts = np.linspace(0.5, 6.0, 12)
        rs = cmap_bs.r_on_grid(ts)
        for t, r in zip(ts, rs):
            assert r == pytest.approx(cmap_bs.r_of_t(float(t)), abs=5e-9)

    def test_below_domain_raises(self, cmap_bs):
        with pytest.raises(DomainError):
            cmap_bs.t_of_r(0.9)


def test_csv_export(tmp_path):
    profs = [bs_profile(r) for r in (1.5, 2.0, 2.5)]
    path = tmp_path / "profiles.csv"
    write_profile_csv(path, profs, extra_columns={"flag": [1.0, 2.0, 3.0]})
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "coord,A1,A2,A3,B1,B2,B3,dA1,dA2,dA3,dB1,dB2,dB3,flag"
    assert len(lines) == 4
    assert lines[1].startswith("1.5,")
