import math

import numpy as np
import pytest

from sirham import (
    Chart,
    CompartmentState,
    EpidemicParams,
    Formulation,
    Method,
    MissingDiagnostic,
    NewtonDivergence,
    ParamSchedule,
    RhsDomainError,
    RunSpec,
    ScenarioError,
    StepAcrossSingularity,
    integrate,
    reconstruct_ordinary_time,
)
from sirham.hamiltonian import hamilton_rhs_log
from sirham.integrators import (
    step_explicit_euler,
    step_implicit_midpoint,
    step_rk4,
    step_symplectic_euler,
    step_time_fe_cg1,
    step_variational_midpoint,
)

P = EpidemicParams(beta=0.3, gamma=0.1)
LOG_START = (math.log(0.01), math.log(0.99))


def log_rhs(z):
    return hamilton_rhs_log(z, P)


def rotation(z):
    # exactly solvable benchmark independent of the epidemic model:
    # z(t) = (cos t, -sin t) from (1, 0)
    return (z[1], -z[0])


class TestSteppers:
    """One-step values frozen from 50-digit reference computations."""

    def test_rk4_on_the_plain_model(self, params):
        from sirham.dynamics import sir_rhs

        y1 = step_rk4(lambda z: sir_rhs(z, params), (0.01, 0.99), 0.1)
        assert y1[0] == pytest.approx(0.01019890752362063287781, abs=1e-17)
        assert y1[1] == pytest.approx(0.9897001011277925846213, abs=1e-15)

    def test_rk4_rotation(self):
        # on a linear field one step is exactly the degree-4 Taylor
        # polynomial of the rotation, so the oracle is closed-form
        h = 0.1
        y1 = step_rk4(rotation, (1.0, 0.0), h)
        assert y1[0] == pytest.approx(1.0 - h**2 / 2 + h**4 / 24, abs=5e-15)
        assert y1[1] == pytest.approx(-(h - h**3 / 6), abs=5e-15)
        # and the truncation error against the true circle is fifth order
        assert abs(y1[0] - math.cos(h)) < 1e-7
        assert abs(y1[1] + math.sin(h)) < 1e-7

    def test_implicit_midpoint(self):
        y1 = step_implicit_midpoint(log_rhs, LOG_START, 0.05, tol=1e-14)
        assert y1[0] == pytest.approx(-4.595321305194035394045, abs=5e-13)
        assert y1[1] == pytest.approx(-0.01020107634130862215029, abs=5e-13)

    def test_time_finite_element_gauss2(self):
        y1 = step_time_fe_cg1(log_rhs, LOG_START, 0.05, tol=1e-14)
        assert y1[0] == pytest.approx(-4.595321305184499989125, abs=5e-13)
        assert y1[1] == pytest.approx(-0.01020107695055540187324, abs=5e-13)

    def test_time_finite_element_midpoint_rule_collapses(self):
        """With one-point midpoint quadrature the weak step IS the implicit
        midpoint step: identical fixed point, identical arithmetic."""
        a = step_time_fe_cg1(log_rhs, LOG_START, 0.05, quadrature="midpoint")
        b = step_implicit_midpoint(log_rhs, LOG_START, 0.05)
        assert max(abs(x - y) for x, y in zip(a, b)) <= 1e-14

    def test_time_finite_element_rejects_unknown_quadrature(self):
        with pytest.raises(ScenarioError):
            step_time_fe_cg1(log_rhs, LOG_START, 0.05, quadrature="lobatto9")

    def test_symplectic_euler(self):
        y1 = step_symplectic_euler(log_rhs, LOG_START, 0.05, tol=1e-14)
        assert y1[0] == pytest.approx(-4.595320185988091368036, abs=5e-13)
        assert y1[1] == pytest.approx(-0.01020182065413968143557, abs=5e-13)

    def test_symplectic_euler_needs_pairs(self):
        with pytest.raises(ScenarioError):
            step_symplectic_euler(lambda y: (0.0,), (1.0,), 0.1)

    def test_explicit_euler(self):
        y1 = step_explicit_euler(log_rhs, LOG_START, 0.05)
        assert y1[0] == pytest.approx(-4.595320185988091368036, abs=1e-15)
        assert y1[1] == pytest.approx(-0.01020033585350144118355, abs=1e-15)

    def test_variational_equals_implicit_midpoint(self):
        a = step_variational_midpoint(LOG_START, 0.05, P, Chart.LOGARITHMIC)
        b = step_implicit_midpoint(log_rhs, LOG_START, 0.05)
        assert max(abs(x - y) for x, y in zip(a, b)) <= 1e-12

    def test_midpoint_is_time_reversible(self):
        forward = step_implicit_midpoint(log_rhs, LOG_START, 0.05, tol=1e-14)
        back = step_implicit_midpoint(log_rhs, forward, -0.05, tol=1e-14)
        assert max(abs(x - y) for x, y in zip(back, LOG_START)) <= 1e-13

    def test_newton_reports_exhaustion(self):
        # an unreachable tolerance forces the iteration cap
        with pytest.raises(NewtonDivergence):
            step_implicit_midpoint(log_rhs, LOG_START, 0.05, tol=0.0, max_iter=2)

    def test_newton_reports_non_finite_iterates(self):
        def broken(z):
            return (math.nan, math.nan)

        with pytest.raises(NewtonDivergence):
            step_implicit_midpoint(broken, LOG_START, 0.05)


class TestRunSpec:
    def test_string_coercion(self):
        spec = RunSpec(method="rk4", formulation="log_t", dt=0.1, t_end=1.0)
        assert spec.method is Method.RK4
        assert spec.formulation is Formulation.LOG_T

    def test_default_name_and_label(self):
        spec = RunSpec(method="rk4", formulation="log_t", dt=0.1, t_end=1.0)
        assert spec.name == "log_t-rk4"
        named = RunSpec(
            method="rk4", formulation="log_t", dt=0.1, t_end=1.0, label="mine"
        )
        assert named.name == "mine"

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dt": 0.0},
            {"dt": -0.1},
            {"dt": math.inf},
            {"t_end": -1.0},
            {"sample_stride": 0},
            {"extended_mode": "hybrid"},
            {"newton_tol": 0.0},
            {"newton_max_iter": 0},
            {"constraint_tol": -1.0},
        ],
    )
    def test_validation(self, kwargs):
        base = dict(method="rk4", formulation="log_t", dt=0.1, t_end=1.0)
        base.update(kwargs)
        with pytest.raises(ScenarioError):
            RunSpec(**base)

    def test_unknown_method_or_formulation(self):
        with pytest.raises(ValueError):
            RunSpec(method="rk5", formulation="log_t", dt=0.1, t_end=1.0)
        with pytest.raises(ValueError):
            RunSpec(method="rk4", formulation="cartesian", dt=0.1, t_end=1.0)

    def test_variational_is_restricted_to_canonical_charts(self):
        for formulation in ("basic_t", "single_ode_log", "extended_4d_direct"):
            with pytest.raises(ScenarioError):
                RunSpec(
                    method="variational_midpoint",
                    formulation=formulation,
                    dt=0.1,
                    t_end=1.0,
                )
        RunSpec(method="variational_midpoint", formulation="rescaled_tau", dt=0.1, t_end=1.0)
        RunSpec(method="variational_midpoint", formulation="log_t", dt=0.1, t_end=1.0)


class TestIntegrate:
    def test_argument_types(self, init, schedule):
        spec = RunSpec(method="rk4", formulation="basic_t", dt=0.1, t_end=1.0)
        with pytest.raises(ScenarioError):
            integrate("rk4", init, schedule)
        with pytest.raises(ScenarioError):
            integrate(spec, (0.01, 0.99), schedule)
        with pytest.raises(ScenarioError):
            integrate(spec, init, EpidemicParams(0.3, 0.1))

    def test_lands_exactly_on_the_horizon(self, init, schedule):
        # 0.3 is not representable in binary; naive accumulation would
        # land near but not on t_end
        spec = RunSpec(method="rk4", formulation="basic_t", dt=0.3, t_end=10.0)
        traj = integrate(spec, init, schedule)
        assert traj.t[-1] == 10.0

    def test_zero_horizon(self, init, schedule):
        spec = RunSpec(method="rk4", formulation="basic_t", dt=0.1, t_end=0.0)
        traj = integrate(spec, init, schedule)
        assert traj.n_samples == 1
        assert traj.t[0] == 0.0
        assert traj.i[0] == pytest.approx(0.01)

    def test_sample_stride_keeps_the_final_state(self, init, schedule):
        spec = RunSpec(
            method="rk4", formulation="basic_t", dt=0.1, t_end=1.0, sample_stride=7
        )
        traj = integrate(spec, init, schedule)
        # steps 0 and 7 pass the stride filter, step 10 is the forced tail
        assert list(traj.t) == pytest.approx([0.0, 0.7, 1.0])

    @pytest.mark.parametrize(
        "formulation",
        [f.value for f in Formulation],
    )
    def test_every_formulation_stays_consistent(self, init, schedule, formulation):
        spec = RunSpec(method="rk4", formulation=formulation, dt=0.01, t_end=0.5)
        traj = integrate(spec, init, schedule)
        assert np.all(np.isfinite(traj.s))
        assert np.all(np.isfinite(traj.i))
        assert np.max(np.abs(traj.s + traj.i + traj.r - 1.0)) <= 1e-12
        assert traj.clock == spec.formulation.clock
        assert traj.coords.shape == (traj.n_samples, spec.formulation.dim)

    def test_rescaled_clock_fills_ordinary_time(self, init, schedule):
        spec = RunSpec(method="rk4", formulation="rescaled_tau", dt=0.01, t_end=1.0)
        traj = integrate(spec, init, schedule)
        assert traj.tau[-1] == 1.0
        assert traj.t[-1] > traj.tau[-1]  # dilation is tiny early on
        assert np.all(np.diff(traj.t) > 0.0)

    def test_ordinary_clock_fills_intrinsic_time(self, init, schedule):
        spec = RunSpec(method="rk4", formulation="log_t", dt=0.1, t_end=5.0)
        traj = integrate(spec, init, schedule)
        assert traj.t[-1] == 5.0
        assert 0.0 < traj.tau[-1] < 5.0
        assert np.all(np.diff(traj.tau) > 0.0)

    def test_degenerate_start_is_refused(self, schedule):
        spec = RunSpec(method="rk4", formulation="rescaled_tau", dt=0.01, t_end=1.0)
        no_infection = CompartmentState(s=0.99, i=0.0, r=0.01)
        with pytest.raises(StepAcrossSingularity):
            integrate(spec, no_infection, schedule)

    def test_marching_past_the_clock_asymptote_is_refused(self, init, schedule):
        # beyond the finite intrinsic-time span of the epidemic the
        # dilation collapses and the time map diverges
        spec = RunSpec(method="rk4", formulation="rescaled_tau", dt=0.01, t_end=3.2)
        with pytest.raises(StepAcrossSingularity):
            integrate(spec, init, schedule)

    def test_rescaled_clock_rejects_schedules(self, init):
        sched = ParamSchedule(
            switch_times=(0.0, 30.0),
            params=(EpidemicParams(0.3, 0.1), EpidemicParams(0.15, 0.1)),
        )
        spec = RunSpec(method="rk4", formulation="rescaled_tau", dt=0.01, t_end=1.0)
        with pytest.raises(ScenarioError):
            integrate(spec, init, sched)

    def test_switch_lands_on_a_sample(self, init):
        sched = ParamSchedule(
            switch_times=(0.0, 0.35),
            params=(EpidemicParams(0.3, 0.1), EpidemicParams(0.15, 0.1)),
        )
        # 0.35 is not a multiple of dt; the march must still hit it exactly
        spec = RunSpec(method="rk4", formulation="basic_t", dt=0.1, t_end=1.0)
        traj = integrate(spec, init, sched)
        assert 0.35 in traj.t
        assert traj.t[-1] == 1.0

    def test_schedule_keeps_the_state_continuous(self, init):
        """A parameter switch re-expresses derived state but never moves
        the physical point: composing two constant-parameter runs by hand
        must reproduce the scheduled run."""
        a, b = EpidemicParams(0.3, 0.1), EpidemicParams(0.15, 0.1)
        sched = ParamSchedule(switch_times=(0.0, 2.0), params=(a, b))
        for formulation in ("basic_t", "log_t", "single_ode_log", "extended_4d_log"):
            spec = RunSpec(method="rk4", formulation=formulation, dt=0.05, t_end=4.0)
            scheduled = integrate(spec, init, sched)

            first = integrate(
                RunSpec(method="rk4", formulation=formulation, dt=0.05, t_end=2.0),
                init,
                ParamSchedule.constant(a),
            )
            handoff = CompartmentState(
                s=float(first.s[-1]), i=float(first.i[-1]), r=float(first.r[-1])
            )
            second = integrate(
                RunSpec(method="rk4", formulation=formulation, dt=0.05, t_end=2.0),
                handoff,
                ParamSchedule.constant(b),
            )
            k = int(np.searchsorted(scheduled.t, 2.0))
            assert scheduled.t[k] == 2.0
            assert scheduled.i[-1] == pytest.approx(second.i[-1], abs=1e-12)
            assert scheduled.s[-1] == pytest.approx(second.s[-1], abs=1e-12)
            assert scheduled.i[k] == pytest.approx(first.i[-1], abs=1e-14)


class TestExtendedModes:
    def test_reconstruction_pins_the_constraint_to_zero(self, init, schedule):
        spec = RunSpec(
            method="rk4",
            formulation="extended_4d_log",
            dt=0.05,
            t_end=5.0,
            extended_mode="reconstruct",
        )
        traj = integrate(spec, init, schedule)
        q0, q1, p0, p1 = traj.coords.T
        assert np.max(np.abs(q0 + 2.0 * p1)) == 0.0
        assert np.max(np.abs(q1 - 2.0 * p0)) == 0.0

    def test_both_modes_march_the_same_coordinates(self, init, schedule):
        """The momentum block never feeds back into the coordinate block,
        so the 4-d march and the reconstruction agree on coordinates to
        rounding."""
        kwargs = dict(formulation="extended_4d_log", dt=0.05, t_end=5.0)
        direct = integrate(
            RunSpec(method="rk4", extended_mode="direct4d", **kwargs), init, schedule
        )
        rebuilt = integrate(
            RunSpec(method="rk4", extended_mode="reconstruct", **kwargs), init, schedule
        )
        assert np.max(np.abs(direct.coords[:, :2] - rebuilt.coords[:, :2])) <= 1e-13
        assert np.max(np.abs(direct.coords[:, 2:] - rebuilt.coords[:, 2:])) <= 1e-13

    def test_explicit_methods_also_hold_the_constraint(self, init, schedule):
        # the constraint rate vanishes identically, so even explicit Euler
        # transports it exactly; only rounding enters
        spec = RunSpec(
            method="explicit_euler", formulation="extended_4d_log", dt=0.05, t_end=5.0
        )
        traj = integrate(spec, init, schedule)
        q0, q1, p0, p1 = traj.coords.T
        assert np.max(np.abs(q0 + 2.0 * p1)) <= 1e-14
        assert np.max(np.abs(q1 - 2.0 * p0)) <= 1e-14


class TestReconstructOrdinaryTime:
    def test_needs_a_rescaled_clock(self, init, schedule):
        spec = RunSpec(method="rk4", formulation="log_t", dt=0.1, t_end=1.0)
        traj = integrate(spec, init, schedule)
        with pytest.raises(MissingDiagnostic):
            reconstruct_ordinary_time(traj)

    def test_is_idempotent_on_fresh_runs(self, init, schedule):
        # integrate() already maps the clock for rescaled runs; remapping
        # from the stored samples must reproduce the same column on the
        # stored grid
        spec = RunSpec(method="rk4", formulation="rescaled_tau", dt=0.001, t_end=1.0)
        traj = integrate(spec, init, schedule)
        again = reconstruct_ordinary_time(traj)
        # per-step accumulation vs sample-grid quadrature: same rule, same
        # grid (stride 1), so the columns coincide
        assert np.max(np.abs(again.t - traj.t)) <= 1e-12
