import math

import pytest

from bautin_dde import model
from bautin_dde.integrator import (
    HistoryFunction,
    IntegrationError,
    IntegrationOptions,
    Trajectory,
    integrate,
    integrate_dde,
)
from conftest import BASE, P1
from oracles import linear_dde_exact, linear_dde_exact_derivative


def linear_rhs(x_now, x_delayed):
    return -x_delayed


def run_linear(t_end=2.0, **option_overrides):
    options = IntegrationOptions(t_end=t_end, **option_overrides)
    history = HistoryFunction.constant(1.0, 1.0)
    return integrate_dde(linear_rhs, 1.0, history, options)


class TestHistoryFunction:
    def test_constant(self):
        h = HistoryFunction.constant(3.2, 5.0)
        assert h(0.0) == 3.2
        assert h(-5.0) == 3.2
        assert h.description == "constant"

    def test_domain_enforced(self):
        h = HistoryFunction.constant(1.0, 2.0)
        with pytest.raises(ValueError):
            h(-2.5)
        with pytest.raises(ValueError):
            h(0.5)


class TestOptions:
    def test_validation(self):
        with pytest.raises(ValueError):
            IntegrationOptions(rel_tol=0.0)
        with pytest.raises(ValueError):
            IntegrationOptions(abs_tol=-1e-9)
        with pytest.raises(ValueError):
            IntegrationOptions(t_end=0.0)
        with pytest.raises(ValueError):
            IntegrationOptions(max_step=-1.0)

    def test_max_step_capped_by_delay(self):
        history = HistoryFunction.constant(1.0, 1.0)
        options = IntegrationOptions(t_end=2.0, max_step=1.5)
        with pytest.raises(ValueError, match="max_step"):
            integrate_dde(linear_rhs, 1.0, history, options)

    def test_history_delay_mismatch(self):
        history = HistoryFunction.constant(1.0, 2.0)
        with pytest.raises(ValueError, match="history delay"):
            integrate_dde(linear_rhs, 1.0, history, IntegrationOptions(t_end=2.0))


class TestLinearEquation:
    def test_matches_closed_form(self):
        traj = run_linear(t_end=2.0)
        worst = max(abs(traj.eval(0.01 * j) - linear_dde_exact(0.01 * j))
                    for j in range(201))
        assert worst < 1e-6

    def test_piecewise_form(self):
        traj = run_linear(t_end=2.0)
        assert traj.eval(0.5) == pytest.approx(0.5, abs=1e-9)
        assert traj.eval(1.0) == pytest.approx(0.0, abs=1e-9)
        # x(t) = 1 - t + (t-1)^2/2 on [1, 2]
        assert traj.eval(1.5) == pytest.approx(-0.375, abs=1e-9)
        assert traj.eval(2.0) == pytest.approx(-0.5, abs=1e-9)

    def test_longer_horizon(self):
        traj = run_linear(t_end=8.0)
        worst = max(abs(traj.eval(0.05 * j) - linear_dde_exact(0.05 * j))
                    for j in range(161))
        assert worst < 1e-5

    def test_derivative_examples(self):
        traj = run_linear(t_end=2.0)
        assert traj.derivative(0.5) == -1.0
        assert traj.derivative(1.5) == pytest.approx(
            linear_dde_exact_derivative(1.5), abs=1e-9)


class TestTrajectoryEval:
    def test_exact_at_mesh_nodes(self):
        traj = run_linear(t_end=2.0)
        for i in range(len(traj.ts)):
            assert traj.eval(traj.ts[i]) == traj.xs[i]

    def test_history_region_delegates(self):
        traj = run_linear(t_end=2.0)
        assert traj.eval(-0.5) == 1.0
        assert traj.eval(-1.0) == 1.0

    def test_out_of_range_raises(self):
        traj = run_linear(t_end=2.0)
        with pytest.raises(ValueError):
            traj.eval(2.5)
        with pytest.raises(ValueError):
            traj.eval(-1.5)

    def test_derivative_out_of_range(self):
        traj = run_linear(t_end=2.0)
        with pytest.raises(ValueError):
            traj.derivative(-0.1)

    def test_derivative_matches_finite_difference(self):
        traj = run_linear(t_end=2.0)
        for t in (0.3, 0.7, 1.3, 1.8):
            h = 1e-5
            fd = (traj.eval(t + h) - traj.eval(t - h)) / (2.0 * h)
            assert traj.derivative(t) == pytest.approx(fd, abs=1e-4)

    def test_csv_export(self):
        traj = run_linear(t_end=2.0)
        text = traj.to_csv([0.0, 1.0, 2.0])
        lines = text.strip().split("\n")
        assert lines[0] == "t,x,xdot"
        assert len(lines) == 4
        t0, x0, xdot0 = (float(v) for v in lines[1].split(","))
        assert (t0, x0) == (0.0, 1.0)
        assert xdot0 == -1.0


class TestModelIntegration:
    def test_equilibrium_is_preserved(self):
        x2 = model.x2(BASE)
        history = HistoryFunction.constant(x2, BASE.r)
        options = IntegrationOptions(t_end=1000.0 * BASE.r)
        traj = integrate(BASE, history, options)
        worst = max(abs(x - x2) for x in traj.xs)
        assert worst < 10.0 * options.abs_tol

    def test_equilibrium_dense_output(self):
        x2 = model.x2(BASE)
        history = HistoryFunction.constant(x2, BASE.r)
        traj = integrate(BASE, history, IntegrationOptions(t_end=100.0))
        for j in range(50):
            t = 2.0 * j
            assert traj.eval(t) == pytest.approx(x2, abs=1e-9)
            assert traj.derivative(t) == pytest.approx(0.0, abs=1e-9)

    def test_breakpoints_on_mesh(self):
        history = HistoryFunction.constant(model.x2(P1) + 0.5, P1.r)
        traj = integrate(P1, history, IntegrationOptions(t_end=6.0 * P1.r))
        for m in range(1, 5):
            assert m * P1.r in traj.ts

    def test_steps_never_exceed_delay(self):
        history = HistoryFunction.constant(model.x2(P1) + 0.5, P1.r)
        traj = integrate(P1, history, IntegrationOptions(t_end=400.0))
        gaps = [b - a for a, b in zip(traj.ts, traj.ts[1:])]
        assert max(gaps) <= P1.r * (1.0 + 1e-12)

    def test_determinism(self):
        history = HistoryFunction.constant(model.x2(P1) + 0.5, P1.r)
        options = IntegrationOptions(t_end=500.0)
        a = integrate(P1, history, options)
        b = integrate(P1, history, options)
        assert a.ts == b.ts
        assert a.xs == b.xs
        assert a.fs == b.fs


class TestFailureModes:
    def test_nan_rhs_reports_last_time(self):
        def fenced(x_now, x_delayed):
            return float("nan") if x_now > 1.5 else 1.0

        history = HistoryFunction.constant(1.0, 1.0)
        with pytest.raises(IntegrationError) as info:
            integrate_dde(fenced, 1.0, history, IntegrationOptions(t_end=5.0))
        assert info.value.t_last <= 0.6

    def test_error_carries_time_in_message(self):
        def fenced(x_now, x_delayed):
            return float("nan") if x_now > 1.5 else 1.0

        history = HistoryFunction.constant(1.0, 1.0)
        with pytest.raises(IntegrationError, match="last valid time"):
            integrate_dde(fenced, 1.0, history, IntegrationOptions(t_end=5.0))


class TestConvergenceOrder:
    def test_third_order_on_linear_equation(self):
        errors = []
        steps = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
        sample_ts = [0.05 * j for j in range(1, 160)]
        for h in steps:
            traj = run_linear(t_end=8.0, fixed_step=h)
            errors.append(max(abs(traj.eval(t) - linear_dde_exact(t))
                              for t in sample_ts))
        orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
        assert min(orders) >= 2.7, (steps, errors, orders)

    def test_fixed_step_lands_on_breaks(self):
        traj = run_linear(t_end=4.0, fixed_step=0.01)
        for m in (1.0, 2.0, 3.0, 4.0):
            assert m in traj.ts
