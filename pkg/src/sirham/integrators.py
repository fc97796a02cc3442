"""Fixed-step time integrators and the trajectory march.

All steppers advance one step of an autonomous system given as a callable
on plain float tuples.  They realise the one-parameter update family

    y_next = y + dt * f(y_alpha),    y_alpha = (1 - alpha) y + alpha y_next,

at alpha = 0 (explicit Euler), alpha = 1/2 (implicit midpoint and its
variational and Galerkin relatives), and a per-component mix of 0 and 1
(symplectic Euler); classical RK4 is the reference non-conservative
high-order scheme.  Implicit equations are solved by Newton iteration with
a finite-difference Jacobian and an explicit-Euler predictor.

:func:`integrate` marches a :class:`RunSpec` over a parameter schedule and
returns a :class:`Trajectory` carrying both clocks (ordinary time t and
the intrinsic epidemic clock tau with d(tau) = S*I dt), the compartment
fractions, and the conserved energy at every sample.  Runs whose native
clock is tau obtain the ordinary-time column by trapezoidal accumulation
of 1/(S*I) during the march; :func:`reconstruct_ordinary_time` performs
the same quadrature on an existing trajectory's samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import dynamics, hamiltonian, lagrangian
from .core import (
    Chart,
    CompartmentState,
    EpidemicParams,
    ParamSchedule,
    PhasePoint2,
    to_log,
)
from .errors import (
    MissingDiagnostic,
    NewtonDivergence,
    NonFiniteInput,
    OutsideLegendreDomain,
    ScenarioError,
    StepAcrossSingularity,
)

__all__ = [
    "Formulation",
    "Method",
    "RunSpec",
    "Trajectory",
    "integrate",
    "reconstruct_ordinary_time",
    "step_explicit_euler",
    "step_implicit_midpoint",
    "step_rk4",
    "step_symplectic_euler",
    "step_time_fe_cg1",
    "step_variational_midpoint",
]

Rhs = Callable[[tuple], tuple]

#: a rescaled-clock run refuses to start below this dilation
START_DILATION_FLOOR = 1e-10
#: and aborts once the dilation falls below this during the march
RUN_DILATION_FLOOR = 1e-14

_GAUSS2_NODES = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)


class Method(Enum):
    """Stepping scheme, with formal order and structure-preservation flag."""

    def __new__(cls, label: str, order: int, structure_preserving: bool):
        obj = object.__new__(cls)
        obj._value_ = label
        obj.order = order
        obj.structure_preserving = structure_preserving
        return obj

    EXPLICIT_EULER = ("explicit_euler", 1, False)
    RK4 = ("rk4", 4, False)
    SYMPLECTIC_EULER = ("symplectic_euler", 1, True)
    IMPLICIT_MIDPOINT = ("implicit_midpoint", 2, True)
    VARIATIONAL_MIDPOINT = ("variational_midpoint", 2, True)
    TIME_FE_CG1_GAUSS2 = ("time_fe_cg1_gauss2", 2, True)


class Formulation(Enum):
    """Which face of the model is integrated, in which clock and chart."""

    def __new__(cls, label: str, clock: str, chart: Chart, dim: int):
        obj = object.__new__(cls)
        obj._value_ = label
        obj.clock = clock
        obj.chart = chart
        obj.dim = dim
        return obj

    #: (I, S) in ordinary time; the plain model
    BASIC_T = ("basic_t", "t", Chart.DIRECT, 2)
    #: (I, S) in the intrinsic clock; canonical Hamiltonian flow
    RESCALED_TAU = ("rescaled_tau", "tau", Chart.DIRECT, 2)
    #: (ln I, ln S) in ordinary time; canonical with constant J
    LOG_T = ("log_t", "t", Chart.LOGARITHMIC, 2)
    #: (I, dI/dtau): scalar second-order reduction, direct chart
    SINGLE_ODE_DIRECT = ("single_ode_direct", "tau", Chart.DIRECT, 2)
    #: (ln I, d ln I/dt): scalar second-order reduction, log chart
    SINGLE_ODE_LOG = ("single_ode_log", "t", Chart.LOGARITHMIC, 2)
    #: coordinates plus constrained momenta, direct chart
    EXTENDED_4D_DIRECT = ("extended_4d_direct", "tau", Chart.DIRECT, 4)
    #: coordinates plus constrained momenta, log chart
    EXTENDED_4D_LOG = ("extended_4d_log", "t", Chart.LOGARITHMIC, 4)


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to reproduce one integration run.

    ``dt`` and ``t_end`` are measured in the formulation's own clock
    (ordinary time or the intrinsic epidemic clock).  ``sample_stride``
    keeps every n-th step in the trajectory; clock accumulation still uses
    every step, and the final state is always kept.  ``extended_mode``
    selects, for the 4-d formulations, between marching the full system
    ("direct4d") and marching the closed coordinate block with momenta
    rebuilt from the constraint afterwards ("reconstruct").
    """

    method: Method
    formulation: Formulation
    dt: float
    t_end: float
    label: str | None = None
    sample_stride: int = 1
    extended_mode: str = "direct4d"
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    constraint_tol: float = 1e-9

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "formulation", Formulation(self.formulation))
        dt = float(self.dt)
        t_end = float(self.t_end)
        if not (math.isfinite(dt) and dt > 0.0):
            raise ScenarioError(f"dt must be positive and finite, got {self.dt}")
        if not (math.isfinite(t_end) and t_end >= 0.0):
            raise ScenarioError(f"t_end must be non-negative, got {self.t_end}")
        object.__setattr__(self, "dt", dt)
        object.__setattr__(self, "t_end", t_end)
        if int(self.sample_stride) < 1:
            raise ScenarioError(f"sample_stride must be >= 1, got {self.sample_stride}")
        object.__setattr__(self, "sample_stride", int(self.sample_stride))
        if self.extended_mode not in ("direct4d", "reconstruct"):
            raise ScenarioError(
                f"extended_mode must be 'direct4d' or 'reconstruct', got {self.extended_mode!r}"
            )
        if not (self.newton_tol > 0.0 and math.isfinite(self.newton_tol)):
            raise ScenarioError(f"newton_tol must be positive, got {self.newton_tol}")
        if int(self.newton_max_iter) < 1:
            raise ScenarioError("newton_max_iter must be >= 1")
        object.__setattr__(self, "newton_max_iter", int(self.newton_max_iter))
        if not (self.constraint_tol > 0.0 and math.isfinite(self.constraint_tol)):
            raise ScenarioError(f"constraint_tol must be positive, got {self.constraint_tol}")
        if self.method is Method.VARIATIONAL_MIDPOINT and self.formulation not in (
            Formulation.RESCALED_TAU,
            Formulation.LOG_T,
        ):
            raise ScenarioError(
                "variational midpoint steps the 2-d canonical charts only "
                f"(rescaled_tau or log_t), not {self.formulation.value}"
            )

    @property
    def name(self) -> str:
        return self.label or f"{self.formulation.value}-{self.method.value}"


@dataclass
class Trajectory:
    """Sampled run: both clocks, fractions, energy, and raw chart state.

    ``coords`` holds the integrated variables themselves, one row per
    sample (2 or 4 columns depending on the formulation); ``s``, ``i``,
    ``r`` are the compartment fractions recovered from them, and ``h`` the
    conserved energy evaluated with the parameters active at each sample.
    """

    formulation: Formulation
    chart: Chart
    clock: str
    t: np.ndarray
    tau: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray
    h: np.ndarray
    coords: np.ndarray
    schedule: ParamSchedule
    spec: RunSpec | None = None

    @property
    def n_samples(self) -> int:
        return len(self.t)


# ---------------------------------------------------------------------------
# Newton iteration for the implicit schemes

def _newton(
    residual: Callable[[tuple], tuple],
    y0: tuple,
    tol: float,
    max_iter: int,
) -> tuple:
    """Solve residual(y) = 0 by Newton with a finite-difference Jacobian."""
    y = y0
    r = residual(y)
    n = len(y)
    jac = np.empty((n, n))
    for _ in range(max_iter):
        norm = max(abs(c) for c in r)
        if norm <= tol:
            return y
        for j in range(n):
            h = 1e-7 * max(1.0, abs(y[j]))
            bumped = list(y)
            bumped[j] += h
            rp = residual(tuple(bumped))
            for k in range(n):
                jac[k, j] = (rp[k] - r[k]) / h
        try:
            delta = np.linalg.solve(jac, np.asarray(r, dtype=float))
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"singular Jacobian in Newton iteration: {exc}") from exc
        y = tuple(yi - di for yi, di in zip(y, delta))
        if not all(math.isfinite(c) for c in y):
            raise NewtonDivergence(f"Newton iterate left the finite range: {y}")
        r = residual(y)
    norm = max(abs(c) for c in r)
    if norm <= tol:
        return y
    raise NewtonDivergence(
        f"no convergence after {max_iter} iterations, residual norm {norm:.3e}"
    )


# ---------------------------------------------------------------------------
# one-step schemes

def step_explicit_euler(rhs: Rhs, y: tuple, dt: float) -> tuple:
    """Forward Euler: first order, conserves nothing; the baseline."""
    f = rhs(y)
    return tuple(yi + dt * fi for yi, fi in zip(y, f))


def step_rk4(rhs: Rhs, y: tuple, dt: float) -> tuple:
    """Classical fourth-order Runge-Kutta step."""
    half = 0.5 * dt
    k1 = rhs(y)
    k2 = rhs(tuple(yi + half * ki for yi, ki in zip(y, k1)))
    k3 = rhs(tuple(yi + half * ki for yi, ki in zip(y, k2)))
    k4 = rhs(tuple(yi + dt * ki for yi, ki in zip(y, k3)))
    sixth = dt / 6.0
    return tuple(
        yi + sixth * (a + 2.0 * (b + c) + d)
        for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
    )


def step_symplectic_euler(
    rhs: Rhs,
    y: tuple,
    dt: float,
    *,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> tuple:
    """Mixed-endpoint Euler on a state split into (coordinates, momenta).

    The first half of the state advances explicitly with the old second
    half; the second half then advances with the updated first half (an
    implicit equation in general, solved by Newton, but explicit for both
    epidemic charts, where the momentum rate does not depend on the
    momenta).  First order; symplectic on the canonical charts.
    """
    n = len(y)
    if n % 2:
        raise ScenarioError("symplectic Euler needs an even-dimensional state")
    nq = n // 2
    f0 = rhs(y)
    q_new = tuple(y[k] + dt * f0[k] for k in range(nq))

    def residual(p: tuple) -> tuple:
        f = rhs(q_new + p)
        return tuple(p[k] - y[nq + k] - dt * f[nq + k] for k in range(n - nq))

    p_pred = tuple(y[nq + k] + dt * f0[nq + k] for k in range(n - nq))
    p_new = _newton(residual, p_pred, tol, max_iter)
    return q_new + p_new


def step_implicit_midpoint(
    rhs: Rhs,
    y: tuple,
    dt: float,
    *,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> tuple:
    """Implicit midpoint rule: second order, symplectic with constant J."""

    def residual(u: tuple) -> tuple:
        mid = tuple(0.5 * (yi + ui) for yi, ui in zip(y, u))
        f = rhs(mid)
        return tuple(ui - yi - dt * fi for ui, yi, fi in zip(u, y, f))

    return _newton(residual, step_explicit_euler(rhs, y, dt), tol, max_iter)


def step_variational_midpoint(
    coords: tuple,
    dt: float,
    params: EpidemicParams,
    chart: Chart,
    *,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> tuple:
    """Discrete variational step from the extended first-order Lagrangian.

    The discrete Lagrangian is the midpoint quadrature

        L_d(a, b) = dt * L((a + b)/2, (b - a)/dt),

    and the update enforces discrete momentum matching: the continuous
    momentum at the current point plus the left-slot derivative of L_d
    must vanish.  Because the Lagrangian is degenerate (linear in the
    rates), the two-point scheme closes after a single step and the
    discrete momentum stays pinned to the coordinates, so no momentum
    state is carried.  For this Lagrangian the update coincides with the
    implicit midpoint rule applied to the canonical flow; the test suite
    asserts that coincidence rather than assuming it.
    """
    p_now = lagrangian.extended_lagrangian_gradients(
        coords, (0.0, 0.0), params, chart
    )[1]

    def residual(q_new: tuple) -> tuple:
        mid = (0.5 * (coords[0] + q_new[0]), 0.5 * (coords[1] + q_new[1]))
        rate = ((q_new[0] - coords[0]) / dt, (q_new[1] - coords[1]) / dt)
        d_mid, d_rate = lagrangian.extended_lagrangian_gradients(mid, rate, params, chart)
        # d/da of L_d(a, b): half a step of the midpoint slot minus the rate slot
        return (
            p_now[0] + 0.5 * dt * d_mid[0] - d_rate[0],
            p_now[1] + 0.5 * dt * d_mid[1] - d_rate[1],
        )

    if chart is Chart.DIRECT:
        flow = hamiltonian.hamilton_rhs_direct
    else:
        flow = hamiltonian.hamilton_rhs_log
    predictor = step_explicit_euler(lambda z: flow(z, params), coords, dt)
    return _newton(residual, predictor, tol, max_iter)


def step_time_fe_cg1(
    rhs: Rhs,
    y: tuple,
    dt: float,
    *,
    quadrature: str = "gauss2",
    tol: float = 1e-12,
    max_iter: int = 50,
) -> tuple:
    """Continuous-Galerkin step: linear trial state, constant test functions.

    With the two-point Gauss rule the update integrates the right-hand
    side exactly for quadratic integrands along the linear segment; with
    ``quadrature="midpoint"`` it degenerates to the implicit midpoint rule,
    which the tests assert as an internal consistency check.
    """
    if quadrature == "gauss2":
        nodes, weights = _GAUSS2_NODES, (0.5, 0.5)
    elif quadrature == "midpoint":
        nodes, weights = (0.5,), (1.0,)
    else:
        raise ScenarioError(f"unknown quadrature {quadrature!r}")

    def residual(u: tuple) -> tuple:
        acc = [0.0] * len(y)
        for sigma, w in zip(nodes, weights):
            stage = tuple((1.0 - sigma) * yi + sigma * ui for yi, ui in zip(y, u))
            f = rhs(stage)
            for k, fk in enumerate(f):
                acc[k] += w * fk
        return tuple(ui - yi - dt * ak for ui, yi, ak in zip(u, y, acc))

    return _newton(residual, step_explicit_euler(rhs, y, dt), tol, max_iter)


# ---------------------------------------------------------------------------
# per-formulation plumbing for the march

def _make_rhs(form: Formulation, params: EpidemicParams, constraint_tol: float) -> Rhs:
    if form is Formulation.BASIC_T:
        return lambda y: dynamics.sir_rhs(y, params)
    if form is Formulation.RESCALED_TAU:
        return lambda y: hamiltonian.hamilton_rhs_direct(y, params)
    if form is Formulation.LOG_T:
        return lambda y: hamiltonian.hamilton_rhs_log(y, params)
    if form is Formulation.SINGLE_ODE_DIRECT:
        return lambda y: (y[1], dynamics.rescaled_accel(y[1], params))
    if form is Formulation.SINGLE_ODE_LOG:
        return lambda y: (y[1], dynamics.log_accel(y[0], y[1], params))
    if form in (Formulation.EXTENDED_4D_DIRECT, Formulation.EXTENDED_4D_LOG):
        chart = form.chart
        return lambda y: hamiltonian._extended_rates(y, params, chart, constraint_tol)
    raise ScenarioError(f"unknown formulation {form!r}")


def _make_dilation(
    form: Formulation, params: EpidemicParams
) -> Callable[[tuple], float]:
    """S*I as a function of the raw state; the rate of the intrinsic clock."""
    beta, gamma = params.beta, params.gamma
    if form in (Formulation.BASIC_T, Formulation.RESCALED_TAU, Formulation.EXTENDED_4D_DIRECT):
        return lambda y: y[0] * y[1]
    if form in (Formulation.LOG_T, Formulation.EXTENDED_4D_LOG):
        return lambda y: math.exp(y[0] + y[1])
    if form is Formulation.SINGLE_ODE_DIRECT:
        def dil_direct(y: tuple) -> float:
            if y[1] >= beta:
                raise OutsideLegendreDomain(
                    f"rate {y[1]} reached beta = {beta}; susceptible fraction undefined"
                )
            return y[0] * gamma / (beta - y[1])
        return dil_direct
    if form is Formulation.SINGLE_ODE_LOG:
        def dil_log(y: tuple) -> float:
            if y[1] <= -gamma:
                raise OutsideLegendreDomain(
                    f"rate {y[1]} reached -gamma = {-gamma}; susceptible fraction undefined"
                )
            return math.exp(y[0]) * (y[1] + gamma) / beta
        return dil_log
    raise ScenarioError(f"unknown formulation {form!r}")


def _initial_state(
    form: Formulation, init: CompartmentState, params: EpidemicParams
) -> tuple:
    i0, s0 = init.i, init.s
    if form in (Formulation.BASIC_T, Formulation.RESCALED_TAU):
        return (i0, s0)
    if form is Formulation.SINGLE_ODE_DIRECT:
        return (i0, lagrangian.rate_from_momentum_direct(s0, params))
    if form is Formulation.EXTENDED_4D_DIRECT:
        return (i0, s0) + hamiltonian.consistent_momenta((i0, s0))
    # everything below needs the logarithmic chart
    z = to_log(PhasePoint2(i0, s0, Chart.DIRECT))
    if form is Formulation.LOG_T:
        return (z.q, z.p)
    if form is Formulation.SINGLE_ODE_LOG:
        return (z.q, lagrangian.rate_from_momentum_log(z.p, params))
    if form is Formulation.EXTENDED_4D_LOG:
        return (z.q, z.p) + hamiltonian.consistent_momenta((z.q, z.p))
    raise ScenarioError(f"unknown formulation {form!r}")


def _remap_at_switch(
    form: Formulation, y: tuple, old: EpidemicParams, new: EpidemicParams
) -> tuple:
    """Carry the state across a parameter switch.

    The physical chart point is continuous; only reductions that carry a
    rate as state need a remap, because the rate depends on the rates'
    parameters on each side of the switch.
    """
    if form is Formulation.SINGLE_ODE_LOG:
        s_log = lagrangian.momentum_from_rate_log(y[1], old)
        return (y[0], lagrangian.rate_from_momentum_log(s_log, new))
    if form is Formulation.SINGLE_ODE_DIRECT:
        s = lagrangian.momentum_from_rate_direct(y[1], old)
        return (y[0], lagrangian.rate_from_momentum_direct(s, new))
    return y


def _make_stepper(
    spec: RunSpec, params: EpidemicParams, chart: Chart
) -> Callable[[Rhs, tuple, float], tuple]:
    m = spec.method
    if m is Method.EXPLICIT_EULER:
        return lambda rhs, y, h: step_explicit_euler(rhs, y, h)
    if m is Method.RK4:
        return lambda rhs, y, h: step_rk4(rhs, y, h)
    kw = {"tol": spec.newton_tol, "max_iter": spec.newton_max_iter}
    if m is Method.SYMPLECTIC_EULER:
        return lambda rhs, y, h: step_symplectic_euler(rhs, y, h, **kw)
    if m is Method.IMPLICIT_MIDPOINT:
        return lambda rhs, y, h: step_implicit_midpoint(rhs, y, h, **kw)
    if m is Method.TIME_FE_CG1_GAUSS2:
        return lambda rhs, y, h: step_time_fe_cg1(rhs, y, h, **kw)
    if m is Method.VARIATIONAL_MIDPOINT:
        if spec.formulation not in (Formulation.RESCALED_TAU, Formulation.LOG_T):
            raise ScenarioError(
                "variational midpoint steps the 2-d canonical charts only; "
                "use formulation rescaled_tau or log_t"
            )
        return lambda rhs, y, h: step_variational_midpoint(y, h, params, chart, **kw)
    raise ScenarioError(f"unknown method {m!r}")


def _segment_steps(span: float, dt: float) -> tuple[int, float]:
    """Number of full dt steps in a segment plus the short closing step."""
    n_full = int(math.floor(span / dt + 1e-9))
    tail = span - n_full * dt
    if tail <= 1e-9 * dt:
        tail = 0.0
    return n_full, tail


# ---------------------------------------------------------------------------
# the march

def integrate(
    spec: RunSpec, init: CompartmentState, schedule: ParamSchedule
) -> Trajectory:
    """March one run and return its sampled trajectory.

    The step grid is laid segment by segment, so parameter switches always
    land on step boundaries (the closing step of a segment is shortened as
    needed).  Switch times are ordinary-time quantities, which is why
    formulations living in the intrinsic clock accept only constant
    schedules.  Runs in the intrinsic clock also refuse to start closer to
    the S*I = 0 singularity of the time map than 1e-10, and abort if the
    dilation falls below 1e-14 along the way.
    """
    if not isinstance(spec, RunSpec):
        raise ScenarioError(f"spec must be a RunSpec, got {type(spec).__name__}")
    if not isinstance(init, CompartmentState):
        raise ScenarioError(f"init must be a CompartmentState, got {type(init).__name__}")
    if not isinstance(schedule, ParamSchedule):
        raise ScenarioError(f"schedule must be a ParamSchedule, got {type(schedule).__name__}")

    form = spec.formulation
    if form.dim == 4 and spec.extended_mode == "reconstruct":
        return _integrate_reconstruct(spec, init, schedule)

    clock_is_t = form.clock == "t"
    if not clock_is_t and not schedule.is_constant:
        raise ScenarioError(
            "parameter switches are specified in ordinary time; formulations "
            "in the intrinsic clock support constant parameters only"
        )

    segments = (
        schedule.segments(spec.t_end)
        if clock_is_t
        else [(0.0, spec.t_end, schedule.params[0])]
    )

    y = _initial_state(form, init, segments[0][2])
    dil_fn = _make_dilation(form, segments[0][2])
    dil_prev = dil_fn(y)
    if not clock_is_t and dil_prev < START_DILATION_FLOOR:
        raise StepAcrossSingularity(
            f"S*I = {dil_prev:.3e} at the initial state; the intrinsic clock "
            f"is degenerate below {START_DILATION_FLOOR:.0e}"
        )

    dt, stride = spec.dt, spec.sample_stride
    prim = [0.0]
    sec_list = [0.0]
    states = [y]
    seg_ids = [0]
    sec = 0.0
    step_no = 0
    last_kept = 0
    prev_params = segments[0][2]

    for seg_id, (a, b, pars) in enumerate(segments):
        if seg_id > 0:
            # the boundary sample keeps the outgoing segment's representation;
            # only the state marched onward is re-expressed
            y = _remap_at_switch(form, y, prev_params, pars)
        prev_params = pars
        rhs = _make_rhs(form, pars, spec.constraint_tol)
        dil_fn = _make_dilation(form, pars)
        stepper = _make_stepper(spec, pars, form.chart)
        dil_prev = dil_fn(y)
        n_full, tail = _segment_steps(b - a, dt)
        for k in range(n_full + (1 if tail else 0)):
            h = dt if k < n_full else tail
            y = stepper(rhs, y, h)
            t_now = a + (k + 1) * dt if k < n_full else b
            if k == n_full - 1 and not tail:
                t_now = b
            dil_now = dil_fn(y)
            if clock_is_t:
                sec += 0.5 * h * (dil_prev + dil_now)
            else:
                if dil_now < RUN_DILATION_FLOOR:
                    raise StepAcrossSingularity(
                        f"S*I fell to {dil_now:.3e} at clock {t_now:.6g}; the "
                        "run crossed the singularity of the time map"
                    )
                sec += 0.5 * h * (1.0 / dil_prev + 1.0 / dil_now)
            dil_prev = dil_now
            step_no += 1
            if step_no % stride == 0:
                prim.append(t_now)
                sec_list.append(sec)
                states.append(y)
                seg_ids.append(seg_id)
                last_kept = step_no
    if last_kept != step_no:  # always keep the final state
        prim.append(spec.t_end)
        sec_list.append(sec)
        states.append(y)
        seg_ids.append(len(segments) - 1)

    return _build_trajectory(
        spec, form, schedule, segments, prim, sec_list, states, seg_ids
    )


def _integrate_reconstruct(
    spec: RunSpec, init: CompartmentState, schedule: ParamSchedule
) -> Trajectory:
    """Extended run via the closed coordinate block plus momentum lift."""
    base_form = (
        Formulation.RESCALED_TAU
        if spec.formulation.chart is Chart.DIRECT
        else Formulation.LOG_T
    )
    base = replace(spec, formulation=base_form, extended_mode="direct4d")
    traj = integrate(base, init, schedule)
    q = traj.coords
    momenta = np.column_stack((0.5 * q[:, 1], -0.5 * q[:, 0]))
    traj.coords = np.column_stack((q, momenta))
    traj.formulation = spec.formulation
    traj.spec = spec
    return traj


def _build_trajectory(
    spec: RunSpec,
    form: Formulation,
    schedule: ParamSchedule,
    segments: Sequence[tuple[float, float, EpidemicParams]],
    prim: list[float],
    sec: list[float],
    states: list[tuple],
    seg_ids: list[int],
) -> Trajectory:
    coords = np.asarray(states, dtype=float)
    prim_arr = np.asarray(prim)
    sec_arr = np.asarray(sec)
    seg_arr = np.asarray(seg_ids)
    if form.clock == "t":
        t_col, tau_col = prim_arr, sec_arr
    else:
        t_col, tau_col = sec_arr, prim_arr

    beta = np.empty(len(seg_arr))
    gamma = np.empty(len(seg_arr))
    for k, (_, _, pars) in enumerate(segments):
        mask = seg_arr == k
        beta[mask] = pars.beta
        gamma[mask] = pars.gamma

    c0, c1 = coords[:, 0], coords[:, 1]
    if form is Formulation.SINGLE_ODE_DIRECT:
        i_col = c0
        s_col = gamma / (beta - c1)
    elif form is Formulation.SINGLE_ODE_LOG:
        i_col = np.exp(c0)
        s_col = (c1 + gamma) / beta
    elif form.chart is Chart.LOGARITHMIC:
        i_col = np.exp(c0)
        s_col = np.exp(c1)
    else:
        i_col, s_col = c0, c1
    r_col = 1.0 - s_col - i_col
    h_col = beta * (i_col + s_col) - gamma * np.log(s_col)

    return Trajectory(
        formulation=form,
        chart=form.chart,
        clock=form.clock,
        t=t_col,
        tau=tau_col,
        s=s_col,
        i=i_col,
        r=r_col,
        h=h_col,
        coords=coords,
        schedule=schedule,
        spec=spec,
    )


def reconstruct_ordinary_time(traj: Trajectory) -> Trajectory:
    """Rebuild ordinary time from a rescaled-clock trajectory's samples.

    Trapezoidal quadrature of dt/dtau = 1/(S*I) over the stored tau grid;
    second-order accurate under step refinement.  :func:`integrate` already
    fills the ordinary-time column at full step resolution, so this is
    only needed for trajectories built by other means (or to check the
    quadrature itself).
    """
    if traj.clock != "tau":
        raise MissingDiagnostic("trajectory already lives in ordinary time")
    dil = traj.s * traj.i
    if traj.n_samples and (np.min(dil) < RUN_DILATION_FLOOR):
        raise StepAcrossSingularity(
            f"S*I reaches {np.min(dil):.3e}; time map undefined"
        )
    if traj.n_samples < 2:
        t = np.zeros(traj.n_samples)
    else:
        inv = 1.0 / dil
        steps = np.diff(traj.tau) * 0.5 * (inv[1:] + inv[:-1])
        t = np.concatenate(([0.0], np.cumsum(steps)))
    out = replace(traj)
    out.t = t
    return out
