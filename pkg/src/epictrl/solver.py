"""Fixed-step RK4 state/costate integration and the forward-backward sweep."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .adjoint import _adjoint_rhs, hamiltonian_grad_u, switching_values
from .exceptions import DivergenceError, ShapeError
from .model import N_CONTROLS, N_STATES, _rhs_controlled, _rhs_uncontrolled
from .objectives import ObjectiveKind, check_existence, evaluate_objective, exposure_factor_warnings
from .scenario import SweepOptions


class ControlRuleWarning(UserWarning):
    """An update rule selected a control outside the admissible box."""


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def make_grid(T, n):
    return np.linspace(0.0, T, n + 1)


@dataclass(frozen=True)
class ControlSchedule:
    """Control values at the ``n + 1`` nodes of a uniform grid on ``[0, T]``."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _frozen(self.times)
        values = _frozen(self.values)
        if times.ndim != 1 or times.size < 2:
            raise ShapeError("schedule grid needs at least two nodes")
        if values.shape != (times.size, N_CONTROLS):
            raise ShapeError(f"schedule values must be ({times.size}, 9), got {values.shape}")
        if not np.all(np.diff(times) > 0):
            raise ShapeError("schedule grid must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, T, n, u):
        u = np.broadcast_to(np.asarray(u, dtype=float), (N_CONTROLS,))
        return cls(make_grid(T, n), np.tile(u, (n + 1, 1)))

    @classmethod
    def zeros(cls, T, n):
        return cls.constant(T, n, 0.0)

    @property
    def n(self):
        return self.times.size - 1

    def within(self, bounds, atol=0.0):
        bounds = np.asarray(bounds, dtype=float)
        return bool(np.all(self.values >= -atol) and np.all(self.values <= bounds + atol))


@dataclass(frozen=True)
class Trajectory:
    """State or costate values on a grid; ``negative_steps`` lists nodes with a negative component."""

    times: np.ndarray
    values: np.ndarray
    negative_steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "times", _frozen(self.times))
        object.__setattr__(self, "values", _frozen(self.values))
        if self.values.shape != (self.times.size, N_STATES):
            raise ShapeError(f"trajectory values must be ({self.times.size}, 7), got {self.values.shape}")


@dataclass(frozen=True)
class Solution:
    kind: ObjectiveKind
    state: Trajectory
    adjoint: Trajectory
    controls: ControlSchedule
    objective: float
    iterations: int
    converged: bool
    last_change: float
    warnings: tuple = field(default_factory=tuple)


def _check_grid(scenario, schedule):
    if schedule.n != scenario.steps:
        raise ShapeError(f"schedule has {schedule.n} steps, scenario expects {scenario.steps}")
    if not np.allclose(schedule.times, make_grid(scenario.horizon, scenario.steps), rtol=0, atol=1e-12 * scenario.horizon):
        raise ShapeError("schedule grid does not match the scenario's uniform grid")


def _axpy(x, h, k):
    return [xi + h * ki for xi, ki in zip(x, k)]


def _finite(values, step, what):
    if not all(math.isfinite(v) for v in values):
        raise DivergenceError(f"{what} became non-finite at step {step}", step=step)


def integrate_forward(scenario, schedule, controlled=True):
    """Classical RK4 for the state.

    Controls at half steps are the mean of the two neighbouring nodes.  With
    ``controlled=False`` the intervention-free dynamics are integrated and the
    schedule only supplies the grid.
    """
    _check_grid(scenario, schedule)
    p = scenario.params.as_tuple()
    n = schedule.n
    h = scenario.dt
    U = schedule.values.tolist()
    x = scenario.initial.to_array().tolist()
    out = np.empty((n + 1, N_STATES))
    out[0] = x
    negative = []
    if controlled:
        f = _rhs_controlled
    else:
        def f(state, _u, params):
            return _rhs_uncontrolled(state, params)
    for k in range(n):
        ua, ub = U[k], U[k + 1]
        um = [0.5 * (a + b) for a, b in zip(ua, ub)]
        k1 = f(x, ua, p)
        k2 = f(_axpy(x, 0.5 * h, k1), um, p)
        k3 = f(_axpy(x, 0.5 * h, k2), um, p)
        k4 = f(_axpy(x, h, k3), ub, p)
        x = [xi + h / 6.0 * (a + 2.0 * b + 2.0 * c + d) for xi, a, b, c, d in zip(x, k1, k2, k3, k4)]
        _finite(x, k + 1, "state")
        if min(x) < 0:
            negative.append(k + 1)
        out[k + 1] = x
    return Trajectory(schedule.times, out, tuple(negative))


def integrate_backward(scenario, state_traj, schedule, kind):
    """RK4 for the costate from ``alpha(T) = 0`` back to ``t = 0``.

    Controls at half steps are the mean of the neighbouring nodes.  The state
    there comes from the cubic Hermite interpolant built from node values and
    node derivatives; a plain mean would cap the scheme at second order.
    """
    kind = ObjectiveKind.parse(kind)
    _check_grid(scenario, schedule)
    if state_traj.values.shape[0] != schedule.times.size or not np.array_equal(state_traj.times, schedule.times):
        raise ShapeError("state trajectory and schedule are on different grids")
    p = scenario.params.as_tuple()
    weights = scenario.weights
    sigma = weights.sigma
    n = schedule.n
    h = scenario.dt
    T = scenario.horizon
    X = state_traj.values.tolist()
    U = schedule.values.tolist()
    a = [0.0] * N_STATES
    out = np.zeros((n + 1, N_STATES))
    fb = _rhs_controlled(X[n], U[n], p)
    for k in range(n, 0, -1):
        tb = T * k / n
        tm = tb - 0.5 * h
        ta = T * (k - 1) / n
        xb, xa = X[k], X[k - 1]
        ub, ua = U[k], U[k - 1]
        fa = _rhs_controlled(xa, ua, p)
        xm = [0.5 * (s + r) + 0.125 * h * (da - db) for s, r, da, db in zip(xa, xb, fa, fb)]
        fb = fa
        um = [0.5 * (s + r) for s, r in zip(ua, ub)]
        dm = math.exp(-sigma * tm)
        k1 = _adjoint_rhs(xb, ub, a, p, weights, math.exp(-sigma * tb), kind)
        k2 = _adjoint_rhs(xm, um, _axpy(a, -0.5 * h, k1), p, weights, dm, kind)
        k3 = _adjoint_rhs(xm, um, _axpy(a, -0.5 * h, k2), p, weights, dm, kind)
        k4 = _adjoint_rhs(xa, ua, _axpy(a, -h, k3), p, weights, math.exp(-sigma * ta), kind)
        a = [ai - h / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4) for ai, q1, q2, q3, q4 in zip(a, k1, k2, k3, k4)]
        _finite(a, k - 1, "costate")
        out[k - 1] = a
    return Trajectory(schedule.times, out)


def _aligned(state_traj, adjoint_traj):
    if state_traj.values.shape != adjoint_traj.values.shape or not np.array_equal(
        state_traj.times, adjoint_traj.times
    ):
        raise ShapeError("state and costate trajectories are on different grids")
    return state_traj.values.T, adjoint_traj.values.T, state_traj.times


def update_controls_cost(state_traj, adjoint_traj, scenario):
    """Clamp the stationary points of the quadratic Hamiltonian into ``[0, u_max]``."""
    x, a, t = _aligned(state_traj, adjoint_traj)
    omega = switching_values(x, a, scenario.params, scenario.weights)
    bounds = np.asarray(scenario.bounds)[:, None]
    return ControlSchedule(t, np.minimum(np.maximum(omega, 0.0), bounds).T)


def update_controls_effectiveness(state_traj, adjoint_traj, scenario, previous_schedule, band=None):
    """Bang-bang rule for the control-affine Hamiltonian (maximized).

    Controls whose switching value ``dH/du_i`` lies inside ``[-band, band]``
    keep their value from ``previous_schedule``.
    """
    x, a, t = _aligned(state_traj, adjoint_traj)
    if previous_schedule.values.shape[0] != t.size:
        raise ShapeError("previous schedule is on a different grid")
    band = scenario.solver.singular_band if band is None else band
    prev = previous_schedule.values.T
    g = hamiltonian_grad_u(x, prev, a, scenario.params, scenario.weights, t, ObjectiveKind.EFFECTIVENESS)
    bounds = np.broadcast_to(np.asarray(scenario.bounds)[:, None], g.shape)
    u = np.where(g > band, bounds, np.where(g < -band, 0.0, prev))
    return ControlSchedule(t, u.T)


def feasibility_rule(omega, bounds):
    """The feasibility characterization: ``u_max`` if ``omega < u_max`` else ``omega``."""
    return np.where(omega < bounds, bounds, omega)


def update_controls_feasibility(state_traj, adjoint_traj, scenario, discounted=None):
    """Feasibility update: apply :func:`feasibility_rule`, then clamp into the box.

    ``discounted`` (default from ``scenario.solver.discount_in_update``) scales
    the switching values by ``exp(sigma t)``.  Selections above ``u_max`` are
    clamped and reported through :class:`ControlRuleWarning`.
    """
    x, a, t = _aligned(state_traj, adjoint_traj)
    if discounted is None:
        discounted = scenario.solver.discount_in_update
    omega = switching_values(x, a, scenario.params, scenario.weights, t, discounted=discounted)
    bounds = np.asarray(scenario.bounds)[:, None]
    selected = feasibility_rule(omega, bounds)
    outside = selected > bounds
    if np.any(outside):
        controls = ", ".join(f"u{i + 1}" for i in np.flatnonzero(outside.any(axis=1)))
        warnings.warn(
            f"feasibility rule selected values above u_max at {int(outside.sum())} node(s) "
            f"({controls}); clamped to the admissible box",
            ControlRuleWarning,
            stacklevel=2,
        )
    return ControlSchedule(t, np.clip(selected, 0.0, bounds).T)


def _update(kind, x, a, scenario, previous):
    if kind is ObjectiveKind.COST:
        return update_controls_cost(x, a, scenario)
    if kind is ObjectiveKind.EFFECTIVENESS:
        return update_controls_effectiveness(x, a, scenario, previous)
    return update_controls_feasibility(x, a, scenario)


def forward_backward_sweep(scenario, kind, options=None, initial=None):
    """Relaxed forward-backward sweep for the selected objective.

    Each iteration integrates the state forward, the costate backward, and
    applies the objective's control update; the next iterate is
    ``theta * u_new + (1 - theta) * u_old``.  Iteration stops once
    ``max |u_new - u_old| <= tol``; the final unrelaxed update is returned.  In effectiveness mode the bang-bang
    update is additionally required to reproduce itself exactly.

    Non-convergence is reported through ``Solution.converged``; a non-finite
    state raises :class:`DivergenceError`.
    """
    kind = ObjectiveKind.parse(kind)
    options = scenario.solver if options is None else options
    if not isinstance(options, SweepOptions):
        raise TypeError("options must be SweepOptions")
    scenario = scenario.replace(solver=options)
    report = check_existence(scenario, kind)
    notes = list(report.warnings)

    u = ControlSchedule.zeros(scenario.horizon, scenario.steps) if initial is None else initial
    theta = options.relaxation
    converged = False
    change = math.inf
    rule_messages = []
    iterations = 0
    for iterations in range(1, options.max_iters + 1):
        x = integrate_forward(scenario, u)
        a = integrate_backward(scenario, x, u, kind)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ControlRuleWarning)
            u_new = _update(kind, x, a, scenario, u)
        rule_messages = [str(w.message) for w in caught if issubclass(w.category, ControlRuleWarning)]
        change = float(np.max(np.abs(u_new.values - u.values)))
        if change <= options.tol:
            if kind is ObjectiveKind.EFFECTIVENESS and change > 0:
                u = u_new
                continue
            converged = True
            if change > 0:
                # accept the projected update so relaxation residue does not
                # leave controls hovering just above a bound
                u = u_new
                x = integrate_forward(scenario, u)
                a = integrate_backward(scenario, x, u, kind)
            break
        u = ControlSchedule(u.times, theta * u_new.values + (1.0 - theta) * u.values)
    else:
        # loop exhausted: x, a belong to the last u only if it was not relaxed
        x = integrate_forward(scenario, u)
        a = integrate_backward(scenario, x, u, kind)

    notes.extend(rule_messages)
    notes.extend(exposure_factor_warnings(u.values))
    if x.negative_steps:
        notes.append(f"state has negative components at {len(x.negative_steps)} node(s)")
    if not converged:
        notes.append(
            f"sweep did not converge in {options.max_iters} iterations (last change {change:.3g})"
        )
    value = evaluate_objective(x.values, u.values, scenario.weights, kind, scenario.horizon)
    return Solution(kind, x, a, u, value, iterations, converged, change, tuple(notes))


def simulate(scenario, schedule=None, controlled=True):
    """Integrate the state under a fixed schedule (zero controls by default)."""
    if schedule is None:
        schedule = ControlSchedule.zeros(scenario.horizon, scenario.steps)
    return integrate_forward(scenario, schedule, controlled=controlled)
