import math

import numpy as np
import pytest

from warpflow import f_bar_closed_form, solve_barrier


def closed_form_R(a, t):
    """d(log sinh R)/dt = -2 for the cosh warp with n = 3."""
    return np.arcsinh(np.sinh(a) * np.exp(-2.0 * t))


class TestCoshClosedForm:
    def test_matches_exact_solution(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 1.0, 0.5, 10.0, 1e-3)
        assert np.max(np.abs(sol.R - closed_form_R(1.0, sol.times))) <= 1e-6

    def test_exact_solution_satisfies_ode(self, cosh_warp):
        # independent check that the reference is right: substitute into the ODE
        t = np.linspace(0, 5, 101)
        R = closed_form_R(1.0, t)
        dR = np.gradient(R, t)
        rhs = -2.0 * np.tanh(R)
        assert np.max(np.abs(dR - rhs)[2:-2]) < 5e-3  # central-gradient error only

    def test_interpolant_accuracy(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 1.0, 0.0, 10.0, 1e-3)
        tq = np.linspace(0.0, 10.0, 997)
        assert np.max(np.abs(sol.R_at(tq) - closed_form_R(1.0, tq))) < 1e-6


class TestEquilibria:
    def test_zero_height_is_fixed(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 0.0, 0.3, 2.0, 1e-3)
        assert np.max(np.abs(sol.R)) == 0.0
        assert np.max(np.abs(sol.f_bar - 0.3)) == 0.0

    def test_f0_one_stays_one(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 1.0, 1.0, 2.0, 1e-3)
        assert np.max(np.abs(sol.f_bar - 1.0)) == 0.0
        assert sol.lambda0 == 0.0


class TestConservation:
    @pytest.mark.parametrize("warp_fixture,a", [("cosh_warp", 1.0), ("dss_curved", 1.0)])
    def test_lambda_drift(self, warp_fixture, a, request):
        warp = request.getfixturevalue(warp_fixture)
        warp = warp[0] if isinstance(warp, tuple) else warp
        sol = solve_barrier(warp, 3, a, 0.4, 10.0, 1e-3)
        assert np.max(sol.lambda_drift()) <= 1e-6

    def test_f_bar_from_conservation_law(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 0.8, 0.25, 10.0, 1e-3)
        cf = f_bar_closed_form(cosh_warp, sol, sol.times)
        assert np.max(np.abs(cf - sol.f_bar)) <= 1e-6
        assert f_bar_closed_form(cosh_warp, sol, 0.0) == pytest.approx(0.25, abs=1e-12)

    def test_limit_value(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 0.7, 0.6, 25.0, 1e-3)
        expected = 1.0 - (1.0 - 0.6) * math.cosh(0.7) ** 2
        assert abs(sol.f_limit - expected) < 1e-14
        assert abs(f_bar_closed_form(cosh_warp, sol, 25.0) - expected) < 1e-8
        assert abs(sol.f_bar[-1] - expected) < 1e-8


class TestMonotonicityAndBounds:
    def test_R_strictly_decreasing_positive(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 1.5, 0.2, 10.0, 1e-3)
        assert np.all(np.diff(sol.R) < 0.0)
        assert np.all(sol.R > 0.0)

    def test_f_bar_nonincreasing_and_above_limit(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 1.0, 0.9, 10.0, 1e-3)
        assert np.all(np.diff(sol.f_bar) <= 0.0)
        assert np.all(sol.f_bar >= sol.f_limit - 1e-12)

    def test_f_bar_above_limit_for_dss(self, dss_flat):
        # h0 != 1 requires the normalized limit 1 - Lambda0/h0^2
        warp, _ = dss_flat
        sol = solve_barrier(warp, 3, 1.2, 0.5, 20.0, 1e-3)
        assert np.all(sol.f_bar >= sol.f_limit - 1e-12)
        assert abs(sol.f_bar[-1] - sol.f_limit) < 1e-6

    def test_comparison_in_f0(self, cosh_warp):
        lo = solve_barrier(cosh_warp, 3, 1.0, 0.2, 8.0, 1e-3)
        hi = solve_barrier(cosh_warp, 3, 1.0, 0.6, 8.0, 1e-3)
        assert np.all(lo.f_bar <= hi.f_bar + 1e-14)

    def test_R_converges(self, cosh_warp):
        for a in (0.5, 1.0, 2.0):
            sol = solve_barrier(cosh_warp, 3, a, 0.0, 20.0, 1e-3)
            assert sol.R[-1] <= 1e-6


class TestThresholdCriticality:
    def test_critical_initial_angle_gives_zero_limit(self, cosh_warp):
        # f0 = tanh^2(0.5) = threshold^2: the limit cancels to zero
        f0 = math.tanh(0.5) ** 2
        sol = solve_barrier(cosh_warp, 3, 0.5, f0, 5.0, 1e-3)
        assert abs(sol.f_limit) < 1e-14

    @pytest.mark.parametrize("eps,sign", [(0.01, 1), (0.01, -1)])
    def test_both_sides_of_threshold(self, cosh_warp, eps, sign):
        f0 = math.tanh(0.5) ** 2 + sign * eps
        sol = solve_barrier(cosh_warp, 3, 0.5, f0, 5.0, 1e-3)
        assert (sol.f_limit > 0) == (sign > 0)


class TestValidation:
    def test_rejects_bad_inputs(self, cosh_warp, quad_warp):
        with pytest.raises(ValueError):
            solve_barrier(cosh_warp, 3, 1.0, 1.5, 1.0)
        with pytest.raises(ValueError):
            solve_barrier(cosh_warp, 3, 1.0, 0.5, 1.0, dt=-1e-3)
        with pytest.raises(Exception):
            solve_barrier(quad_warp, 3, 5.0, 0.5, 1.0)  # outside domain

    def test_time_range_guard(self, cosh_warp):
        sol = solve_barrier(cosh_warp, 3, 1.0, 0.5, 2.0, 1e-3)
        with pytest.raises(ValueError):
            sol.R_at(3.0)
