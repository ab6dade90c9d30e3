import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import blowlab as bl
from blowlab.criteria import (
    GrowthCurve,
    check_kg_condition,
    check_levine_conditions,
    check_nb_condition,
    energy,
    levine_time_bound,
    psi_lower_bound,
    t_star_threshold,
)

from conftest import bump_profile


class TestEnergy:
    def test_zero_state(self, kg_small):
        z = np.zeros(kg_small.space.dim)
        assert energy(kg_small, z, z) == 0.0

    def test_kg_paper_identity_for_special_velocity(self, kg_small):
        # with u1 = u0^2/sqrt(2) and p = 2 the potential cancels the kinetic
        # term: E(0) = |grad u0|^2/2 + m^2 |u0|^2 / 2
        s = kg_small.space
        u0 = bump_profile(s, amplitude=2.0)
        u1 = u0**2 / math.sqrt(2)
        lap = kg_small.aux["laplacian"]
        m = kg_small.params["mass"]
        expected = 0.5 * bl.quad_form(lap, u0) + 0.5 * m**2 * bl.inner(s, u0, u0)
        assert energy(kg_small, u0, u1) == pytest.approx(expected, rel=1e-12)


class TestLevineConditions:
    def test_linear_models_never_satisfy(self):
        # F = 0: Cauchy-Schwarz forces l2_rhs <= (P u1, u1)/2 < l2_lhs
        m = bl.make_klein_gordon(np.pi, 31, mass_m=1.0, p=2.0, linear=True)
        rng = np.random.default_rng(0)
        for _ in range(300):
            u0 = rng.standard_normal(31)
            u1 = rng.standard_normal(31)
            rep = check_levine_conditions(m, u0, u1)
            assert not rep.satisfied

    def test_opposite_velocity_fails_first_condition(self, kg_small):
        u0 = bump_profile(kg_small.space)
        rep = check_levine_conditions(kg_small, u0, -u0)
        assert rep.l1_value < 0
        assert not rep.satisfied

    def test_zero_u0_rejected(self, kg_small):
        z = np.zeros(kg_small.space.dim)
        with pytest.raises(ValueError):
            check_levine_conditions(kg_small, z, z)

    def test_kg_bump_against_direct_kgc1_evaluation(self, kg_small):
        # for u0 >= 0 and u1 = u0^2/sqrt(2), the condition reads
        # int u0^3 > sqrt(2) * sqrt(|grad u0|^2 + m^2 |u0|^2) * |u0|
        s = kg_small.space
        lap = kg_small.aux["laplacian"]
        mass = kg_small.params["mass"]
        for amp in (1.0, 3.0, 5.0, 8.0):
            u0 = bump_profile(s, amplitude=amp)
            u1 = u0**2 / math.sqrt(2)
            rep = check_levine_conditions(kg_small, u0, u1)
            lhs = float(np.dot(s.quad_weights, u0**3))
            rhs = math.sqrt(2) * math.sqrt(
                bl.quad_form(lap, u0) + mass**2 * bl.inner(s, u0, u0)
            ) * math.sqrt(bl.inner(s, u0, u0))
            assert rep.satisfied == (lhs > rhs)

    def test_report_fields_consistent(self, kg_small):
        u0 = bump_profile(kg_small.space, amplitude=5.0)
        u1 = u0**2 / math.sqrt(2)
        rep = check_levine_conditions(kg_small, u0, u1)
        assert rep.satisfied == (rep.l1_value > 0 and rep.l2_lhs < rep.l2_rhs)
        assert rep.psi0 > 0
        assert rep.energy0 == pytest.approx(
            rep.l2_lhs - kg_small.nl.R0 / (1 + 2 * kg_small.nl.alpha))
        assert rep.levine_time_bound == pytest.approx(
            rep.psi0 / (kg_small.nl.alpha * rep.dpsi0))


class TestKgCondition:
    def test_zero_velocity_with_positive_bracket(self, kg_small):
        u0 = bump_profile(kg_small.space, amplitude=0.5)
        assert check_kg_condition(kg_small, u0, np.zeros_like(u0)) is False

    def test_agreement_with_levine(self, kg_small):
        rng = np.random.default_rng(1)
        n = kg_small.space.dim
        agree = 0
        for _ in range(300):
            u0 = rng.standard_normal(n)
            u1 = rng.standard_normal(n)
            a = check_kg_condition(kg_small, u0, u1)
            b = check_levine_conditions(kg_small, u0, u1).satisfied
            assert a == b
            agree += 1
        assert agree == 300

    def test_negative_bracket_counts_with_positive_cross(self, kg_small):
        # large amplitude drives the energy negative
        u0 = bump_profile(kg_small.space, amplitude=30.0)
        u1 = 0.01 * u0
        rep = check_levine_conditions(kg_small, u0, u1)
        assert rep.energy0 < 0
        assert check_kg_condition(kg_small, u0, u1) is True
        assert check_kg_condition(kg_small, u0, -u1) is False

    def test_scaling_threshold_by_bisection(self, kg_small):
        # the family c*u0 with u1 = (c u0)^2/sqrt(2) satisfies the condition
        # for all c above a single threshold
        s = kg_small.space
        base = bump_profile(s)

        def satisfied(c):
            u0 = c * base
            return check_kg_condition(kg_small, u0, u0**2 / math.sqrt(2))

        lo, hi = 0.1, 50.0
        assert not satisfied(lo) and satisfied(hi)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if satisfied(mid):
                hi = mid
            else:
                lo = mid
        threshold = hi
        for c in np.linspace(1.02 * threshold, 5 * threshold, 7):
            assert satisfied(c)
        for c in np.linspace(0.2 * threshold, 0.98 * threshold, 7):
            assert not satisfied(c)

    def test_wrong_model_kind_rejected(self, scalar_ode):
        with pytest.raises(ValueError):
            check_kg_condition(scalar_ode, np.array([1.0]), np.array([1.0]))


class TestNbCondition:
    def test_zero_velocity_fails(self, nb_small):
        u0 = 0.5 * np.ones(nb_small.space.dim)
        assert energy(nb_small, u0, np.zeros_like(u0)) > 0
        assert check_nb_condition(nb_small, u0, np.zeros_like(u0)) is False

    def test_nonpositive_middle_fails(self, nb_small):
        # large boundary potential makes 2 E0 + Rb/(1+2a) <= 0; the strict
        # chain then fails even with a positive cross term
        u0 = 3.0 * np.ones(nb_small.space.dim)
        u1 = 0.1 * u0
        mid = 2 * energy(nb_small, u0, u1) + 2 * nb_small.nl.R0 / 2
        assert mid <= 0
        assert check_nb_condition(nb_small, u0, u1) is False

    def test_positive_energy_window_passes(self, nb_small):
        u0 = 2.5 * np.ones(nb_small.space.dim)
        assert check_nb_condition(nb_small, u0, u0) is True

    def test_wrong_kind_rejected(self, kg_small):
        u = np.ones(kg_small.space.dim)
        with pytest.raises(ValueError):
            check_nb_condition(kg_small, u, u)


class TestLevineTimeBound:
    def test_formula(self):
        assert levine_time_bound(1.0, 1.0, 1.0, 0.0) == 1.0
        assert levine_time_bound(2.0, 4.0, 0.5, 3.0) == pytest.approx(4.0)

    def test_hypothesis_violation(self):
        with pytest.raises(ValueError):
            levine_time_bound(1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            levine_time_bound(0.0, 1.0, 1.0)

    def test_monotonicities(self):
        b = levine_time_bound
        assert b(1.0, 1.0, 1.0) > b(1.0, 1.0, 2.0)       # decreasing in alpha
        assert b(1.0, 1.0, 1.0) > b(1.0, 2.0, 1.0)       # decreasing in dpsi
        assert b(2.0, 1.0, 1.0) > b(1.0, 1.0, 1.0)       # increasing in psi

    def test_scalar_ode_oracle(self, scalar_ode):
        # reference blow-up times from a tight adaptive integrator; the bound
        # from any certified point (psi past threshold, psi' > 0) must hold
        rng = np.random.default_rng(2)
        for _ in range(5):
            u0 = rng.uniform(2.0, 4.0)
            u1 = rng.uniform(1.0, 4.0)

            def rhs(t, y):
                return [y[1], y[0]**3 - y[0]]

            def blown(t, y):
                return abs(y[0]) - 1e7
            blown.terminal = True

            sol = solve_ivp(rhs, [0, 20], [u0, u1], rtol=1e-10, atol=1e-10,
                            events=blown, dense_output=True)
            assert sol.t_events[0].size
            t_blow = sol.t_events[0][0]
            e0 = 0.5 * u1**2 + 0.5 * u0**2 - 0.25 * u0**4
            thr = t_star_threshold(scalar_ode, e0)
            for t0 in np.linspace(0, 0.95 * t_blow, 40):
                y, yp = sol.sol(t0)
                psi_t0 = y * y
                dpsi_t0 = 2 * y * yp
                if psi_t0 >= thr and dpsi_t0 > 0:
                    bound = levine_time_bound(psi_t0, dpsi_t0, 0.5, t0)
                    assert t_blow <= bound + 1e-6


class TestPsiLowerBound:
    def test_at_t0_equals_psi(self):
        c = GrowthCurve(t0=1.0, psi_t0=3.0, dpsi_t0=2.0, alpha=0.5)
        assert psi_lower_bound(c, 1.0) == pytest.approx(3.0, rel=1e-14)

    def test_alpha_one_closed_form(self):
        c = GrowthCurve(t0=0.0, psi_t0=1.0, dpsi_t0=1.0, alpha=1.0)
        for t in (0.1, 0.5, 0.9):
            assert psi_lower_bound(c, t) == pytest.approx(1 / (1 - t), rel=1e-12)

    def test_monotone_and_diverging(self):
        c = GrowthCurve(t0=0.0, psi_t0=2.0, dpsi_t0=3.0, alpha=0.5)
        ts = np.linspace(0.0, 0.999 * (c.blowup_time_upper), 50)
        vals = [psi_lower_bound(c, t) for t in ts]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert psi_lower_bound(c, 0.999999 * c.blowup_time_upper) > 1e5

    def test_domain_errors(self):
        c = GrowthCurve(t0=0.0, psi_t0=1.0, dpsi_t0=1.0, alpha=1.0)
        assert c.blowup_time_upper == pytest.approx(1.0)
        with pytest.raises(ValueError):
            psi_lower_bound(c, 1.0)
        with pytest.raises(ValueError):
            psi_lower_bound(c, -0.1)

    def test_curve_invariants(self):
        c = GrowthCurve(t0=2.0, psi_t0=2.0, dpsi_t0=4.0, alpha=0.5)
        assert c.blowup_time_upper == pytest.approx(3.0)
        flat = GrowthCurve(t0=0.0, psi_t0=1.0, dpsi_t0=-1.0, alpha=1.0)
        assert flat.blowup_time_upper == math.inf
        with pytest.raises(ValueError):
            GrowthCurve(t0=0.0, psi_t0=0.0, dpsi_t0=1.0, alpha=1.0)


class TestTStarThreshold:
    def test_nonpositive_energy_clamps_to_zero(self, scalar_ode):
        assert t_star_threshold(scalar_ode, -1.0) == 0.0
        assert t_star_threshold(scalar_ode, 0.0) == 0.0

    def test_formula(self, scalar_ode):
        # alpha = 1/2, a0 = 1, E0 = 1, R0 = 0: psi* = 4(1+2a)E0/(a a0) = 16
        assert t_star_threshold(scalar_ode, 1.0) == pytest.approx(16.0)
        assert t_star_threshold(scalar_ode, 1.0, delta=0.5) == pytest.approx(17.0)

    def test_negative_delta_rejected(self, scalar_ode):
        with pytest.raises(ValueError):
            t_star_threshold(scalar_ode, 1.0, delta=-1.0)
