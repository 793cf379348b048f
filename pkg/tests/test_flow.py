import numpy as np
import pytest

from warpflow import (
    FlowConfig,
    GraphState,
    ScalarField,
    inequality_slack_field,
    flat_torus,
    nonparametric_rate,
    residual_cor26,
    residual_thm31,
    run_flow,
    step,
    theta_sq_rate,
)
from warpflow.flow import DomainExitError, _cfl_dt
from warpflow.geometry import GraphicalityError
from warpflow.initial import random_smooth_graph
from warpflow.warp import WarpingFunction


def sine_state(warp, n=32, offset=0.3, amp=0.1):
    base = flat_torus((n, n))
    x = np.arange(n) / n
    xx, yy = np.meshgrid(x, x, indexing="ij")
    u = ScalarField(offset + amp * np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy), base)
    return GraphState(u, 0.0, warp, base)


def anti_warp():
    """h' < 0 for r > 0: violates the admissibility conditions, slices repel."""
    return WarpingFunction(
        h=lambda r: 1.0 - 0.4 * np.asarray(r, float) ** 2,
        h_prime=lambda r: -0.8 * np.asarray(r, float),
        h_double_prime=lambda r: np.full_like(np.asarray(r, float), -0.8),
        r_bar=1.2,
    )


class TestStep:
    def test_parallel_slice_follows_barrier_rate(self, cosh_warp):
        base = flat_torus((24, 24))
        st = GraphState(base.constant(0.7), 0.0, cosh_warp, base)
        dt = 1e-4
        new = step(st, dt)
        spread = np.max(new.u.values) - np.min(new.u.values)
        assert spread == 0.0  # translation-invariant stencil keeps constants constant
        # Heun reproduces the slice ODE to O(dt^3) per step
        rate = -2.0 * np.tanh(0.7)
        expected = 0.7 + dt * rate
        assert abs(float(new.u.values[0, 0]) - expected) < 4.0 * dt * dt

    def test_zero_slice_is_fixed(self, cosh_warp):
        base = flat_torus((16, 16))
        st = GraphState(base.constant(0.0), 0.0, cosh_warp, base)
        new = step(st, 1e-3)
        assert np.max(np.abs(new.u.values)) == 0.0

    def test_step_doubling_third_order(self, cosh_warp):
        # |one dt step - two dt/2 steps| scales like dt^3
        st = sine_state(cosh_warp, n=32)
        gaps = []
        for dt in (2e-4, 1e-4):
            one = step(st, dt)
            two = step(step(st, dt / 2), dt / 2)
            gaps.append(np.max(np.abs(one.u.values - two.u.values)))
        ratio = gaps[0] / gaps[1]
        assert 6.0 <= ratio <= 10.0, f"step-doubling ratio {ratio}"

    def test_domain_guard(self, cosh_warp):
        quad = anti_warp()
        base = flat_torus((16, 16))
        st = GraphState(base.constant(1.1), 0.0, quad, base)
        with pytest.raises(DomainExitError):
            step(st, 10.0)  # huge step launches the slice through the boundary

    def test_rejects_nonpositive_dt(self, cosh_warp):
        st = sine_state(cosh_warp)
        with pytest.raises(ValueError):
            step(st, 0.0)


class TestRunFlow:
    def test_zero_initial_data_converges_immediately(self, cosh_warp):
        base = flat_torus((16, 16))
        run = run_flow(base.constant(0.0), cosh_warp, base, FlowConfig(t_end=1.0))
        assert run.outcome == "converged"
        assert run.t_final == 0.0
        assert run.n_steps == 0

    def test_tracks_parallel_slice_ode(self, cosh_warp):
        # PDE reproduces the slice ODE: R(t) = arcsinh(sinh(a) e^{-2t})
        base = flat_torus((32, 32))
        cfg = FlowConfig(dt_safety=0.8, t_end=1.0, output_stride=100,
                         residual_checks=frozenset())
        run = run_flow(base.constant(0.5), cosh_warp, base, cfg)
        for d in run.diagnostics:
            exact = np.arcsinh(np.sinh(0.5) * np.exp(-2.0 * d.t))
            assert abs(d.sup_u - exact) <= 1e-6
        final = run.final_state.u.values
        assert np.max(final) - np.min(final) <= 1e-12

    def test_containment_and_angle_bounds(self, cosh_warp):
        st = sine_state(cosh_warp, n=32)
        cfg = FlowConfig(dt_safety=0.8, t_end=1.5, output_stride=100, a0=0.5)
        run = run_flow(st.u, cosh_warp, st.base, cfg)
        assert run.max_containment_excess <= 1e-3
        assert run.min_angle_slack >= -1e-3
        assert run.outcome in ("converged", "t_end_reached")

    def test_symmetry_preserved_exactly(self, cosh_warp):
        # u0 invariant under the half-period translation subgroup stays invariant
        n = 32
        base = flat_torus((n, n))
        x = np.arange(n // 2) / n
        xx, yy = np.meshgrid(x, x, indexing="ij")
        block = 0.25 + 0.08 * np.sin(4 * np.pi * xx) * np.cos(4 * np.pi * yy)
        u0 = ScalarField(np.tile(block, (2, 2)), base)  # bitwise half-period invariant
        assert np.array_equal(u0.values, np.roll(u0.values, (n // 2, n // 2), (0, 1)))
        cfg = FlowConfig(dt_safety=0.8, t_end=0.2, output_stride=10_000,
                         residual_checks=frozenset())
        run = run_flow(u0, cosh_warp, base, cfg)
        uf = run.final_state.u.values
        assert np.array_equal(uf, np.roll(uf, (n // 2, n // 2), (0, 1)))

    def test_abort_on_domain_exit(self):
        aw = anti_warp()
        base = flat_torus((32, 32))
        x = np.arange(32) / 32
        xx, yy = np.meshgrid(x, x, indexing="ij")
        u0 = ScalarField(0.4 + 0.3 * np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy), base)
        cfg = FlowConfig(dt_safety=0.5, t_end=3.0, output_stride=100,
                         residual_checks=frozenset())
        run = run_flow(u0, aw, base, cfg)
        assert run.outcome in ("domain_exit", "graphicality_lost")
        assert run.t_final < 3.0
        assert len(run.diagnostics) >= 1

    def test_initial_floor_violation_raises(self, cosh_warp):
        st = sine_state(cosh_warp, n=32, offset=0.0, amp=0.12)
        with pytest.raises(GraphicalityError):
            run_flow(st.u, cosh_warp, st.base, FlowConfig(theta_floor=0.99, t_end=0.1))

    def test_threshold_report(self, cosh_warp):
        st = sine_state(cosh_warp, n=32)
        cfg = FlowConfig(dt_safety=0.8, t_end=0.05, output_stride=1000, a0=0.5,
                         residual_checks=frozenset())
        run = run_flow(st.u, cosh_warp, st.base, cfg)
        assert abs(run.threshold - np.tanh(0.5)) < 1e-12
        assert run.within_guarantee
        assert run.a0 == 0.5

    def test_barrier_uses_max_of_a0_and_height(self, cosh_warp):
        st = sine_state(cosh_warp, n=16, offset=0.3, amp=0.1)  # sup = 0.4
        cfg = FlowConfig(t_end=0.01, a0=0.2, output_stride=1000,
                         residual_checks=frozenset())
        run = run_flow(st.u, cosh_warp, st.base, cfg)
        assert run.barrier.a == pytest.approx(0.4)


class TestSphereFlows:
    def test_dss_slice_tracks_its_barrier(self, dss_curved):
        # the whole pipeline on the second base variant: tabulated warp,
        # axisymmetric operators, and the comparison ODE as oracle
        warp, _ = dss_curved
        from warpflow import sphere_axisym

        base = sphere_axisym(2, 65)
        cfg = FlowConfig(dt_safety=0.8, t_end=1.0, output_stride=200,
                         residual_checks=frozenset())
        run = run_flow(base.constant(0.5), warp, base, cfg)
        errs = [abs(d.sup_u - float(run.barrier.R_at(d.t))) for d in run.diagnostics]
        assert max(errs) <= 1e-6
        uf = run.final_state.u.values
        assert float(np.max(uf) - np.min(uf)) == 0.0

    def test_axisymmetric_graph_monitors_hold(self, dss_curved):
        warp, _ = dss_curved
        from warpflow import sphere_axisym

        base = sphere_axisym(2, 65)
        u0 = ScalarField(0.3 + 0.1 * np.cos(base.theta_nodes), base)
        cfg = FlowConfig(dt_safety=0.8, t_end=0.5, output_stride=200)
        run = run_flow(u0, warp, base, cfg)
        assert run.outcome in ("converged", "t_end_reached")
        assert run.max_containment_excess <= 1e-3
        assert run.min_angle_slack >= -1e-3
        assert min(d.ineq_slack_min for d in run.diagnostics) >= -1e-3


class TestCfl:
    def test_dt_scales_with_resolution_and_angle(self, cosh_warp):
        cfg = FlowConfig(dt_safety=0.5)
        b1, b2 = flat_torus((32, 32)), flat_torus((64, 64))
        dt1 = _cfl_dt(cfg, b1, 0.9, 1.0)
        dt2 = _cfl_dt(cfg, b2, 0.9, 1.0)
        assert dt1 / dt2 == pytest.approx(4.0)
        assert _cfl_dt(cfg, b1, 0.45, 1.0) == pytest.approx(dt1 / 4.0)

    def test_explicit_stability_margin(self, cosh_warp):
        # one long run at the dt_safety ceiling stays bounded
        st = sine_state(cosh_warp, n=32, amp=0.15)
        cfg = FlowConfig(dt_safety=1.0, t_end=0.5, output_stride=2000,
                         residual_checks=frozenset())
        run = run_flow(st.u, cosh_warp, st.base, cfg)
        assert run.outcome in ("converged", "t_end_reached")
        assert run.diagnostics[-1].sup_u <= 0.41


class TestResiduals:
    def test_parallel_flow_residuals_vanish(self, cosh_warp):
        base = flat_torus((24, 24))
        st = GraphState(base.constant(0.6), 0.0, cosh_warp, base)
        u_dot = nonparametric_rate(st)
        f_dot = theta_sq_rate(st, u_dot)
        assert np.max(np.abs(residual_cor26(st, u_dot).values)) <= 1e-10
        assert np.max(np.abs(residual_thm31(st, f_dot).values)) <= 1e-10

    def test_zero_slice_residuals_vanish(self, cosh_warp):
        base = flat_torus((16, 16))
        st = GraphState(base.constant(0.0), 0.0, cosh_warp, base)
        u_dot = nonparametric_rate(st)
        assert np.max(np.abs(residual_cor26(st, u_dot).values)) == 0.0

    @pytest.mark.parametrize("seed", [0, 4])
    def test_residuals_refine_at_second_order(self, cosh_warp, seed):
        norms26, norms31 = [], []
        for n in (64, 128):
            base = flat_torus((n, n))
            u = random_smooth_graph(base, cosh_warp, seed)
            st = GraphState(u, 0.0, cosh_warp, base)
            u_dot = nonparametric_rate(st)
            f_dot = theta_sq_rate(st, u_dot)
            norms26.append(np.max(np.abs(residual_cor26(st, u_dot).values)))
            norms31.append(np.max(np.abs(residual_thm31(st, f_dot).values)))
        assert 3.0 <= norms26[0] / norms26[1] <= 5.0
        assert 3.0 <= norms31[0] / norms31[1] <= 5.0

    def test_slack_nonnegative_on_admissible_torus_graphs(self, cosh_warp):
        # flat torus: rho = 0, c = 0; inequality slack stays >= -O(dx^2)
        for seed in range(3):
            base = flat_torus((64, 64))
            u = random_smooth_graph(base, cosh_warp, seed, offset=0.3, amplitude=0.1)
            st = GraphState(u, 0.0, cosh_warp, base)
            u_dot = nonparametric_rate(st)
            f_dot = theta_sq_rate(st, u_dot)
            slack = inequality_slack_field(st, f_dot).values
            assert float(np.min(slack)) >= -1e-3

    def test_sphere_residual_includes_base_ricci(self, cosh_warp):
        # on the unit S^2 base the Ric_N(v,v) = m-1 term enters; the equality
        # residual must still refine at second order
        from warpflow import sphere_axisym

        norms = []
        for nodes in (65, 129):
            base = sphere_axisym(2, nodes)
            u = ScalarField(
                0.3 + 0.08 * np.cos(base.theta_nodes) + 0.04 * np.cos(2 * base.theta_nodes),
                base,
            )
            st = GraphState(u, 0.0, cosh_warp, base)
            u_dot = nonparametric_rate(st)
            f_dot = theta_sq_rate(st, u_dot)
            norms.append(np.max(np.abs(residual_thm31(st, f_dot).values)))
        assert 3.0 <= norms[0] / norms[1] <= 5.0


def test_full_identity_residuals_bundle(cosh_warp):
    from warpflow import full_identity_residuals

    st = sine_state(cosh_warp, n=32)
    res = full_identity_residuals(st)
    assert res.theta_sq_evolution is not None
    assert res.inequality_slack is not None
    u_dot = nonparametric_rate(st)
    f_dot = theta_sq_rate(st, u_dot)
    assert np.array_equal(
        res.theta_sq_evolution.values, residual_thm31(st, f_dot).values
    )
    assert np.all(np.isfinite(res.inequality_slack.values))


def test_flow_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(dt_safety=0.0)
    with pytest.raises(ValueError):
        FlowConfig(dt_safety=1.5)
    with pytest.raises(ValueError):
        FlowConfig(theta_floor=0.0)
    with pytest.raises(ValueError):
        FlowConfig(residual_checks=frozenset({"bogus"}))


def test_diagnostics_columns_align(cosh_warp):
    from warpflow.flow import DIAGNOSTIC_COLUMNS

    st = sine_state(cosh_warp, n=16)
    cfg = FlowConfig(t_end=0.01, output_stride=5)
    run = run_flow(st.u, cosh_warp, st.base, cfg)
    row = run.diagnostics[0].row()
    assert len(row) == len(DIAGNOSTIC_COLUMNS)
    assert row[0] == 0.0
