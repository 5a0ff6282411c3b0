"""Running costs, objective functionals and the existence-condition report."""

import enum
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInputError, ShapeError
from .model import N_CONTROLS, as_control, as_state, count_bound_violations, norm_bounds

DEFAULT_SEED = 42
ILL_CONDITIONED_A0 = 1e-8


def default_seed():
    """Sampling seed, overridable through ``EPICTRL_SEED``."""
    raw = os.environ.get("EPICTRL_SEED")
    return DEFAULT_SEED if raw in (None, "") else int(raw)


class ObjectiveKind(str, enum.Enum):
    COST = "cost"
    EFFECTIVENESS = "effectiveness"
    FEASIBILITY = "feasibility"

    @property
    def maximize(self):
        return self is not ObjectiveKind.COST

    @property
    def sense(self):
        return "maximize" if self.maximize else "minimize"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise InvalidInputError(f"unknown objective {value!r}; choose from {choices}") from None


@dataclass(frozen=True)
class ObjectiveWeights:
    """Burden weights ``lambda1..lambda4``, control cost factors ``b1..b9`` and discount ``sigma``."""

    lambdas: tuple = (1.0, 1.0, 1.0, 1.0)
    b: tuple = (1.0,) * N_CONTROLS
    sigma: float = 0.0

    def __post_init__(self):
        lambdas = tuple(float(v) for v in self.lambdas)
        b = tuple(float(v) for v in self.b)
        if len(lambdas) != 4:
            raise InvalidInputError(f"expected 4 lambda weights, got {len(lambdas)}")
        if len(b) != N_CONTROLS:
            raise InvalidInputError(f"expected 9 control cost factors, got {len(b)}")
        for i, v in enumerate(lambdas, 1):
            if not np.isfinite(v) or v < 0:
                raise InvalidInputError(f"lambda{i} must be finite and >= 0, got {v!r}")
        for i, v in enumerate(b, 1):
            if not np.isfinite(v) or v <= 0:
                raise InvalidInputError(f"b{i} must be finite and > 0, got {v!r}")
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise InvalidInputError(f"sigma must be finite and >= 0, got {self.sigma!r}")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def b_array(self):
        return np.array(self.b)

    def discount(self, t):
        return np.exp(-self.sigma * np.asarray(t, dtype=float))


def _burden(x, weights):
    l1, l2, l3, l4 = weights.lambdas
    return l1 * x[1] + l2 * x[2] + l3 * x[3] + l4 * x[4]


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise InvalidInputError("time contains non-finite values")
    return t


def lagrangian_cost(state, u, weights):
    """``lambda1 E + lambda2 Ia + lambda3 Is + lambda4 H + 1/2 sum b_i u_i^2``."""
    x = as_state(state)
    u = as_control(u)
    b = weights.b_array.reshape((N_CONTROLS,) + (1,) * (u.ndim - 1))
    return _burden(x, weights) + 0.5 * np.sum(b * u**2, axis=0)


def effort(state, u, weights):
    """Undiscounted effectiveness integrand: control effort weighted by the population each control reaches."""
    x = as_state(state)
    u = as_control(u)
    S, E, Ia, Is, H, R, _ = x
    b = weights.b
    return (
        (b[0] * u[0] + b[1] * u[1]) * S
        + (b[2] * u[2] + b[3] * u[3] + b[4] * u[4]) * (S + R)
        + b[5] * u[5] * (E + Ia)
        + (b[6] * u[6] + b[7] * u[7]) * Is
        + b[8] * u[8] * H
    )


def lagrangian_effectiveness(state, u, weights, t):
    return effort(state, u, weights) * weights.discount(_check_t(t))


def lagrangian_feasibility(state, u, weights, t):
    return lagrangian_cost(state, u, weights) * weights.discount(_check_t(t))


def lagrangian(state, u, weights, t, kind):
    kind = ObjectiveKind.parse(kind)
    if kind is ObjectiveKind.COST:
        return lagrangian_cost(state, u, weights)
    if kind is ObjectiveKind.EFFECTIVENESS:
        return lagrangian_effectiveness(state, u, weights, t)
    return lagrangian_feasibility(state, u, weights, t)


def evaluate_objective(state_traj, control_schedule, weights, kind, T):
    """Composite trapezoid approximation of the selected objective on ``[0, T]``.

    ``state_traj`` is ``(n+1, 7)`` and ``control_schedule`` ``(n+1, 9)`` on the
    same uniform grid.
    """
    x = np.asarray(state_traj, dtype=float)
    u = np.asarray(control_schedule, dtype=float)
    if x.ndim != 2 or x.shape[1] != 7:
        raise ShapeError(f"state trajectory must be (n+1, 7), got {x.shape}")
    if u.ndim != 2 or u.shape[1] != N_CONTROLS:
        raise ShapeError(f"control schedule must be (n+1, 9), got {u.shape}")
    if x.shape[0] != u.shape[0]:
        raise ShapeError(f"grid mismatch: {x.shape[0]} state nodes vs {u.shape[0]} control nodes")
    if x.shape[0] < 2:
        raise ShapeError("need at least two grid nodes")
    if not np.isfinite(T) or T <= 0:
        raise InvalidInputError(f"horizon must be positive, got {T!r}")
    t = np.linspace(0.0, T, x.shape[0])
    values = lagrangian(x.T, u.T, weights, t, kind)
    return float(np.trapezoid(values, dx=T / (x.shape[0] - 1)))


@dataclass
class ExistenceReport:
    control_set_ok: bool
    bound_f1: float
    bound_f2: float
    convexity_samples_passed: int
    convexity_samples_total: int
    coercivity_a0: float
    coercivity_exponent: float = 2.0
    bound_samples_total: int = 0
    bound_violations: int = 0
    warnings: list = field(default_factory=list)

    @property
    def conditions(self):
        return {
            "control_set": self.control_set_ok,
            "linear_growth": bool(np.isfinite(self.bound_f1) and np.isfinite(self.bound_f2)),
            "convexity": self.convexity_samples_passed == self.convexity_samples_total,
            "coercivity": self.coercivity_a0 > 0,
        }

    @property
    def passed(self):
        return all(self.conditions.values())

    def to_dict(self):
        return {
            "conditions": self.conditions,
            "passed": self.passed,
            "control_set_ok": self.control_set_ok,
            "bound_f1": self.bound_f1,
            "bound_f2": self.bound_f2,
            "bound_samples_total": self.bound_samples_total,
            "bound_violations": self.bound_violations,
            "convexity_samples_passed": self.convexity_samples_passed,
            "convexity_samples_total": self.convexity_samples_total,
            "coercivity_a0": self.coercivity_a0,
            "coercivity_exponent": self.coercivity_exponent,
            "warnings": list(self.warnings),
        }


def exposure_factor_warnings(schedule):
    """Warnings for control schedules that drive a rate multiplier negative.

    ``schedule`` is ``(m, 9)``.  The dynamics are used literally, so a negative
    multiplier reverses the corresponding flow.
    """
    u = np.atleast_2d(np.asarray(schedule, dtype=float))
    factors = {
        "exposure factor (1 - u1 + u2 - u3 - u4 - u5)": 1 - u[:, 0] + u[:, 1] - u[:, 2] - u[:, 3] - u[:, 4],
        "relapse factor (1 - u3 - u4 - u5)": 1 - u[:, 2] - u[:, 3] - u[:, 4],
        "triage factor (1 - u7 - u8)": 1 - u[:, 6] - u[:, 7],
    }
    out = []
    for name, values in factors.items():
        bad = np.flatnonzero(values < 0)
        if bad.size:
            out.append(
                f"{name} is negative at {bad.size} node(s) (min {values.min():.6g}, first node {bad[0]})"
            )
    return out


def check_existence(scenario, kind=ObjectiveKind.COST, samples=1000, seed=None):
    """Re-verify the sufficient conditions for an optimal control to exist.

    Failures are reported in the returned :class:`ExistenceReport`, never raised.
    """
    kind = ObjectiveKind.parse(kind)
    rng = np.random.default_rng(default_seed() if seed is None else seed)
    params, weights = scenario.params, scenario.weights
    bounds = np.asarray(scenario.bounds, dtype=float)
    warnings = []

    control_set_ok = bool(
        bounds.shape == (N_CONTROLS,) and np.all(np.isfinite(bounds)) and np.all((bounds > 0) & (bounds <= 1))
    )
    if not control_set_ok:
        warnings.append("control bounds must be 9 values in (0, 1]")

    bound_f1, bound_f2 = norm_bounds(params)
    states = rng.uniform(0.0, params.N, size=(7, samples))
    v1, v2 = count_bound_violations(params, states)
    if v1 or v2:
        warnings.append(
            f"norm bound exceeded on sampled states (f1: {v1}, f2: {v2} of {samples})"
        )

    x0 = scenario.initial.to_array()
    t = rng.uniform(0.0, scenario.horizon, size=samples)
    v = rng.uniform(0.0, 1.0, size=(N_CONTROLS, samples)) * bounds[:, None]
    w = rng.uniform(0.0, 1.0, size=(N_CONTROLS, samples)) * bounds[:, None]
    a = rng.uniform(0.0, 1.0, size=samples)
    xs = np.repeat(x0[:, None], samples, axis=1)
    mixed = lagrangian(xs, a * v + (1 - a) * w, weights, t, kind)
    chord = a * lagrangian(xs, v, weights, t, kind) + (1 - a) * lagrangian(xs, w, weights, t, kind)
    slack = 1e-12 * (1.0 + np.abs(chord))
    if kind is ObjectiveKind.EFFECTIVENESS:
        ok = np.abs(mixed - chord) <= slack
    else:
        ok = mixed <= chord + slack
    passed = int(np.sum(ok))

    a0 = 0.5 * min(weights.b)
    if a0 < ILL_CONDITIONED_A0:
        warnings.append(
            f"coercivity constant a0 = {a0:.3g} is below {ILL_CONDITIONED_A0:g}; "
            "switching values divide by min(b) and are ill-conditioned"
        )

    return ExistenceReport(
        control_set_ok=control_set_ok,
        bound_f1=bound_f1,
        bound_f2=bound_f2,
        convexity_samples_passed=passed,
        convexity_samples_total=samples,
        coercivity_a0=a0,
        bound_samples_total=samples,
        bound_violations=v1 + v2,
        warnings=warnings,
    )
