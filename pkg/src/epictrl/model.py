"""Seven-compartment epidemic dynamics with nine intervention controls.

State vectors are ordered ``(S, E, Ia, Is, H, R, D)`` and control vectors
``(u1, ..., u9)``.  Every public function accepts either a single point
(shape ``(7,)`` / ``(9,)``) or a batch laid out along trailing axes
(shape ``(7, m)`` / ``(9, m)``), and returns arrays with matching trailing
shape.
"""

from dataclasses import dataclass, fields

import numpy as np

from .exceptions import InvalidInputError

COMPARTMENTS = ("S", "E", "Ia", "Is", "H", "R", "D")
N_STATES = 7
N_CONTROLS = 9

RATE_FIELDS = (
    "tau_ei_a",
    "tau_ia_is",
    "tau_ia_r",
    "tau_is_r",
    "tau_is_h",
    "tau_is_d",
    "tau_h_r",
    "tau_h_d",
    "tau_r_s",
    "zeta_ia_s",
    "zeta_is_s",
    "zeta_h_s",
)


@dataclass(frozen=True)
class ModelParams:
    """Transition rates (per day), contact-infection probabilities and population size."""

    tau_ei_a: float
    tau_ia_is: float
    tau_ia_r: float
    tau_is_r: float
    tau_is_h: float
    tau_is_d: float
    tau_h_r: float
    tau_h_d: float
    tau_r_s: float
    zeta_ia_s: float
    zeta_is_s: float
    zeta_h_s: float
    N: float

    def __post_init__(self):
        for name in RATE_FIELDS:
            value = getattr(self, name)
            if not np.isfinite(value) or not 0.0 <= value <= 1.0:
                raise InvalidInputError(f"{name} must be a finite value in [0, 1], got {value!r}")
        if not np.isfinite(self.N) or self.N <= 0:
            raise InvalidInputError(f"N must be finite and positive, got {self.N!r}")

    def as_tuple(self):
        return tuple(float(getattr(self, f.name)) for f in fields(self))

    def to_dict(self):
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


@dataclass(frozen=True)
class CompartmentState:
    """People counts in each compartment."""

    S: float
    E: float
    Ia: float
    Is: float
    H: float
    R: float
    D: float

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (N_STATES,):
            raise InvalidInputError(f"expected a state of shape (7,), got {x.shape}")
        return cls(*(float(v) for v in x))

    def to_array(self):
        return np.array([self.S, self.E, self.Ia, self.Is, self.H, self.R, self.D])

    def __array__(self, dtype=None, copy=None):
        return self.to_array() if dtype is None else self.to_array().astype(dtype)

    @property
    def total(self):
        return float(self.to_array().sum())

    def validate(self, N, rtol=1e-9):
        """Check load-time invariants: non-negative counts summing to ``N``."""
        x = self.to_array()
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("state contains non-finite values")
        for name, value in zip(COMPARTMENTS, x):
            if value < 0:
                raise InvalidInputError(f"compartment {name} is negative ({value!r})")
        total = x.sum()
        if abs(total - N) > rtol * N:
            raise InvalidInputError(
                f"compartments sum to {total!r}, expected population {N!r}"
            )
        return self


def as_state(state):
    x = np.asarray(state, dtype=float)
    if x.ndim == 0 or x.shape[0] != N_STATES:
        raise InvalidInputError(f"state must have leading dimension 7, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("state contains non-finite values")
    return x


def as_control(u):
    u = np.asarray(u, dtype=float)
    if u.ndim == 0 or u.shape[0] != N_CONTROLS:
        raise InvalidInputError(f"control must have leading dimension 9, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise InvalidInputError("control contains non-finite values")
    return u


def _check_params(params):
    if not isinstance(params, ModelParams):
        raise InvalidInputError(f"expected ModelParams, got {type(params).__name__}")


# The private kernels below work on unpacked components, so they accept plain
# floats (the integrators' hot path) as well as numpy arrays.

def _pressure(p, Ia, Is, H):
    return p[9] * Ia + p[10] * Is + p[11] * H


def _rhs_uncontrolled(x, p):
    S, E, Ia, Is, H, R, D = x
    tei, tiais, tiar, tisr, tish, tisd, thr, thd, trs = p[:9]
    N = p[12]
    inf = _pressure(p, Ia, Is, H) * S / N
    return (
        -inf + trs * R,
        inf - tei * E,
        tei * E - (tiais + tiar) * Ia,
        tiais * Ia - (tisr + tish + tisd) * Is,
        tish * Is - (thr + thd) * H,
        tisr * Is + tiar * Ia + thr * H - trs * R,
        thd * H + tisd * Is,
    )


def _rhs_controlled(x, u, p):
    S, E, Ia, Is, H, R, D = x
    u1, u2, u3, u4, u5, u6, u7, u8, u9 = u
    tei, tiais, tiar, tisr, tish, tisd, thr, thd, trs = p[:9]
    N = p[12]
    pressure = _pressure(p, Ia, Is, H)
    inf = pressure * S / N
    exposure = (1.0 - u1 - u3 - u4 - u5) * inf + u2 * inf
    relapse = (1.0 - u3 - u4 - u5) * trs * R
    tracing = 1.0 - u6
    triage = 1.0 - u7 - u8
    return (
        -exposure + relapse,
        exposure - tracing * tei * E,
        tracing * tei * E - tracing * (tiais + tiar) * Ia,
        tracing * tiais * Ia - triage * (tisr + tish + tisd) * Is,
        triage * tish * Is - (1.0 - u9) * thd * H - u9 * thr * H,
        triage * tisr * Is + tracing * tiar * Ia + u9 * thr * H - relapse,
        (1.0 - u9) * thd * H + triage * tisd * Is,
    )


def _stack(rows, like):
    shape = np.shape(like)[1:]
    return np.stack([np.broadcast_to(np.asarray(r, dtype=float), shape) for r in rows])


def force_of_infection(state, params):
    """Infectious pressure ``zeta_ia_s*Ia + zeta_is_s*Is + zeta_h_s*H``.

    The result is not yet scaled by ``S/N``.
    """
    _check_params(params)
    x = as_state(state)
    return np.asarray(_pressure(params.as_tuple(), x[2], x[3], x[4]), dtype=float)


def rhs_uncontrolled(state, params):
    """Time derivative of the state without any intervention."""
    _check_params(params)
    x = as_state(state)
    return _stack(_rhs_uncontrolled(x, params.as_tuple()), x)


def rhs_controlled(state, u, params):
    """Time derivative of the state under the control vector ``u``.

    The exposure factor is applied literally as
    ``(1 - u1 - u3 - u4 - u5) + u2``; no clamping is done, so large control
    sums can make it negative.
    """
    _check_params(params)
    x = as_state(state)
    u = as_control(u)
    out = _rhs_controlled(x, u, params.as_tuple())
    like = np.empty((N_STATES,) + np.broadcast_shapes(x.shape[1:], u.shape[1:]))
    return _stack(out, like)


def f1_affine(state, params):
    """Control-free part of the control-affine split of the dynamics.

    Equal to ``rhs_controlled(state, 0, params)``.  Note that hospital
    recovery is absent here, unlike :func:`rhs_uncontrolled`.
    """
    _check_params(params)
    x = as_state(state)
    S, E, Ia, Is, H, R, D = x
    tei, tiais, tiar, tisr, tish, tisd, thr, thd, trs = params.as_tuple()[:9]
    inf = force_of_infection(x, params) * S / params.N
    rows = (
        -inf + trs * R,
        inf - tei * E,
        tei * E - (tiais + tiar) * Ia,
        tiais * Ia - (tisr + tish + tisd) * Is,
        tish * Is - thd * H,
        tisr * Is + tiar * Ia - trs * R,
        thd * H + tisd * Is,
    )
    return _stack(rows, x)


def f2_affine(state, params):
    """Control coefficient matrix, shape ``(7, 9)`` (plus any batch axes).

    Entry ``[i, j]`` is the sensitivity of the i-th derivative to ``u_{j+1}``;
    the dynamics equal ``f1_affine(x) + f2_affine(x) @ u``.
    """
    _check_params(params)
    x = as_state(state)
    S, E, Ia, Is, H, R, D = x
    tei, tiais, tiar, tisr, tish, tisd, thr, thd, trs = params.as_tuple()[:9]
    c = np.zeros((N_STATES, N_CONTROLS) + x.shape[1:])

    c11 = force_of_infection(x, params) * S / params.N
    c[0, 0] = c11
    c[0, 1] = -c11
    c[0, 2] = c[0, 3] = c[0, 4] = c11 - trs * R

    c[1, 0] = c[1, 2] = c[1, 3] = c[1, 4] = -c11
    c[1, 1] = c11
    c[1, 5] = tei * E

    c[2, 5] = -tei * E + (tiais + tiar) * Ia

    c[3, 5] = -tiais * Ia
    c[3, 6] = c[3, 7] = (tisr + tish + tisd) * Is

    c[4, 6] = c[4, 7] = -tish * Is
    c[4, 8] = (thd - thr) * H

    c[5, 2] = c[5, 3] = c[5, 4] = trs * R
    c[5, 5] = -tiar * Ia
    c[5, 6] = c[5, 7] = -tisr * Is
    c[5, 8] = thr * H

    c[6, 6] = c[6, 7] = -tisd * Is
    c[6, 8] = -thd * H
    return c


# Entries of f2 that are identically zero, as (row, column) with 0-based indices.
F2_ZERO_PATTERN = tuple(
    (i, j)
    for i, cols in enumerate(
        (
            (5, 6, 7, 8),
            (6, 7, 8),
            (0, 1, 2, 3, 4, 6, 7, 8),
            (0, 1, 2, 3, 4, 8),
            (0, 1, 2, 3, 4, 5),
            (0, 1),
            (0, 1, 2, 3, 4, 5),
        )
    )
    for j in cols
)


def norm_bounds(params):
    """Closed-form a-priori bounds on ``||f1||`` and ``||f2||``.

    Both assume every compartment lies in ``[0, N]``.  Returns
    ``(bound_f1, bound_f2)``.
    """
    _check_params(params)
    p = params
    zeta = p.zeta_ia_s + p.zeta_is_s + p.zeta_h_s
    f1_poly = (
        (p.tau_ia_is + p.tau_ia_r) ** 2
        + p.tau_h_d**2
        + (p.tau_h_d + p.tau_is_d) ** 2
        + (p.tau_is_r + p.tau_is_h + p.tau_is_d) ** 2
        + 2 * zeta**2
        + p.tau_is_r * (p.tau_is_r + 2 * p.tau_ia_r)
        + p.tau_ia_is**2
        + p.tau_is_h**2
        + p.tau_ia_r**2
        + 2 * p.tau_r_s**2
        + 2 * p.tau_ei_a**2
    )
    f2_poly = (
        10 * zeta**2
        + (p.tau_ia_is + p.tau_ia_r) ** 2
        + 2 * p.tau_ei_a**2
        + 2 * (p.tau_is_r + p.tau_is_h + p.tau_is_d) ** 2
        + p.tau_ia_is**2
        + 2 * p.tau_is_h**2
        + (p.tau_h_d - p.tau_h_r) ** 2
        + 3 * p.tau_r_s**2
        + p.tau_ia_r**2
        + 2 * p.tau_is_r**2
        + p.tau_h_r**2
        + 2 * p.tau_is_d**2
        + p.tau_h_d**2
    )
    return p.N * float(np.sqrt(f1_poly)), p.N * float(np.sqrt(f2_poly))


def count_bound_violations(params, states):
    """Count states (columns of a ``(7, m)`` array) whose ``f1``/``f2`` norms exceed the bounds.

    ``f2`` is measured in the Frobenius norm.  Returns ``(f1_violations, f2_violations)``.
    """
    x = as_state(states)
    if x.ndim == 1:
        x = x[:, None]
    bound_f1, bound_f2 = norm_bounds(params)
    norm_f1 = np.linalg.norm(f1_affine(x, params), axis=0)
    norm_f2 = np.sqrt(np.sum(f2_affine(x, params) ** 2, axis=(0, 1)))
    return int(np.sum(norm_f1 > bound_f1)), int(np.sum(norm_f2 > bound_f2))
