"""Hamiltonians, costate dynamics and control gradients for the three objectives.

All three adjoint systems share the same costate-difference skeleton (the
negated state Jacobian of the dynamics, transposed, applied to ``alpha``) and
differ only in their source terms, which come from the running cost.
"""

import numpy as np

from .exceptions import InvalidInputError
from .model import N_STATES, as_control, as_state, rhs_controlled
from .objectives import ObjectiveKind, lagrangian


def as_costate(alpha):
    a = np.asarray(alpha, dtype=float)
    if a.ndim == 0 or a.shape[0] != N_STATES:
        raise InvalidInputError(f"costate must have leading dimension 7, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("costate contains non-finite values")
    return a


def hamiltonian(state, u, alpha, params, weights, t, kind):
    """``alpha . f(x, u) + L(t, x, u)`` for the selected objective."""
    x = as_state(state)
    u = as_control(u)
    a = as_costate(alpha)
    f = rhs_controlled(x, u, params)
    a = a.reshape(a.shape + (1,) * (f.ndim - a.ndim))
    return np.sum(a * f, axis=0) + lagrangian(x, u, weights, t, kind)


def _costate_skeleton(x, u, a, p):
    S, E, Ia, Is, H, R, D = x
    u1, u2, u3, u4, u5, u6, u7, u8, u9 = u
    a1, a2, a3, a4, a5, a6, a7 = a
    tei, tiais, tiar, tisr, tish, tisd, thr, thd, trs = p[:9]
    zia, zis, zh, N = p[9:]
    k = 1.0 - u1 + u2 - u3 - u4 - u5
    m = 1.0 - u3 - u4 - u5
    q = 1.0 - u6
    r = 1.0 - u7 - u8
    pressure = zia * Ia + zis * Is + zh * H
    shared = (a1 - a2) * S / N * k
    return (
        (a1 - a2) / N * k * pressure,
        (a2 - a3) * q * tei,
        shared * zia + q * ((a3 - a4) * tiais + (a3 - a6) * tiar),
        shared * zis + r * ((a4 - a6) * tisr + (a4 - a5) * tish + (a4 - a7) * tisd),
        shared * zh + (1.0 - u9) * (a5 - a7) * thd + u9 * (a5 - a6) * thr,
        (a6 - a1) * m * trs,
        0.0 * a7,
    )


def _sources(x, u, weights, discount, kind):
    """``dL/dx`` for each state component (subtracted from the skeleton)."""
    if kind is ObjectiveKind.EFFECTIVENESS:
        b = weights.b
        u1, u2, u3, u4, u5, u6, u7, u8, u9 = u
        stay_home = b[2] * u3 + b[3] * u4 + b[4] * u5
        return (
            (b[0] * u1 + b[1] * u2 + stay_home) * discount,
            b[5] * u6 * discount,
            b[5] * u6 * discount,
            (b[6] * u7 + b[7] * u8) * discount,
            b[8] * u9 * discount,
            stay_home * discount,
            0.0,
        )
    l1, l2, l3, l4 = weights.lambdas
    scale = 1.0 if kind is ObjectiveKind.COST else discount
    return (0.0, l1 * scale, l2 * scale, l3 * scale, l4 * scale, 0.0, 0.0)


def _adjoint_rhs(x, u, a, p, weights, discount, kind):
    skeleton = _costate_skeleton(x, u, a, p)
    sources = _sources(x, u, weights, discount, kind)
    return tuple(s - src for s, src in zip(skeleton, sources))


def _broadcast_rows(rows, shape):
    return np.stack([np.broadcast_to(np.asarray(r, dtype=float), shape) for r in rows])


def adjoint_rhs(state, u, alpha, params, weights, t, kind):
    """Costate time derivative ``d(alpha)/dt = -dH/dx`` (analytic)."""
    kind = ObjectiveKind.parse(kind)
    x = as_state(state)
    u = as_control(u)
    a = as_costate(alpha)
    t = np.asarray(t, dtype=float)
    rows = _adjoint_rhs(x, u, a, params.as_tuple(), weights, weights.discount(t), kind)
    shape = np.broadcast_shapes(x.shape[1:], u.shape[1:], a.shape[1:], t.shape)
    return _broadcast_rows(rows, shape)


def _switching_dynamics(x, a, p):
    """``alpha . df/du_i`` for each control: the dynamics part of ``dH/du``."""
    S, E, Ia, Is, H, R, D = x
    a1, a2, a3, a4, a5, a6, a7 = a
    tei, tiais, tiar, tisr, tish, tisd, thr, thd, trs = p[:9]
    zia, zis, zh, N = p[9:]
    inf = (zia * Ia + zis * Is + zh * H) * S / N
    vaccination = (a1 - a2) * inf
    distancing = vaccination + (a6 - a1) * trs * R
    tracing = (a2 - a3) * tei * E + ((a3 - a4) * tiais + (a3 - a6) * tiar) * Ia
    triage = ((a4 - a5) * tish + (a4 - a6) * tisr + (a4 - a7) * tisd) * Is
    care = ((a6 - a5) * thr + (a5 - a7) * thd) * H
    return (vaccination, -vaccination, distancing, distancing, distancing, tracing, triage, triage, care)


def _reach(x):
    """Population each control acts on in the effectiveness objective."""
    S, E, Ia, Is, H, R, D = x
    return (S, S, S + R, S + R, S + R, E + Ia, Is, Is, H)


def hamiltonian_grad_u(state, u, alpha, params, weights, t, kind):
    """Analytic ``dH/du``, shape ``(9, ...)``."""
    kind = ObjectiveKind.parse(kind)
    x = as_state(state)
    u = as_control(u)
    a = as_costate(alpha)
    t = np.asarray(t, dtype=float)
    dyn = _switching_dynamics(x, a, params.as_tuple())
    b = weights.b
    if kind is ObjectiveKind.EFFECTIVENESS:
        disc = weights.discount(t)
        rows = [g + bi * n * disc for g, bi, n in zip(dyn, b, _reach(x))]
    else:
        disc = 1.0 if kind is ObjectiveKind.COST else weights.discount(t)
        rows = [g + bi * ui * disc for g, bi, ui in zip(dyn, b, u)]
    shape = np.broadcast_shapes(x.shape[1:], u.shape[1:], a.shape[1:], t.shape)
    return _broadcast_rows(rows, shape)


def switching_values(state, alpha, params, weights, t=0.0, discounted=False):
    """Unconstrained stationary points ``omega_i`` of the quadratic Hamiltonians.

    ``omega_i = -(alpha . df/du_i) / b_i``; with ``discounted=True`` the result
    is multiplied by ``exp(sigma t)`` (the stationary point of the discounted
    Hamiltonian).
    """
    x = as_state(state)
    a = as_costate(alpha)
    S, E, Ia, Is, H, R, D = x
    a1, a2, a3, a4, a5, a6, a7 = a
    p = params
    b = weights.b
    pressure = p.zeta_ia_s * Ia + p.zeta_is_s * Is + p.zeta_h_s * H
    vacc = S * (a2 - a1) * pressure / p.N
    relapse = (a1 - a6) * p.tau_r_s * R
    tracing = (a3 - a2) * p.tau_ei_a * E + (a4 - a3) * p.tau_ia_is * Ia + (a6 - a3) * p.tau_ia_r * Ia
    triage = (
        (a5 * p.tau_is_h + a6 * p.tau_is_r + a7 * p.tau_is_d)
        - a4 * (p.tau_is_r + p.tau_is_h + p.tau_is_d)
    ) * Is
    care = ((a5 - a6) * p.tau_h_r + (a7 - a5) * p.tau_h_d) * H
    numerators = (vacc, -vacc, vacc + relapse, vacc + relapse, vacc + relapse, tracing, triage, triage, care)
    omega = [num / bi for num, bi in zip(numerators, b)]
    shape = np.broadcast_shapes(x.shape[1:], a.shape[1:], np.shape(t))
    omega = _broadcast_rows(omega, shape)
    if discounted:
        omega = omega * np.exp(weights.sigma * np.asarray(t, dtype=float))
    return omega


def fd_step(values, rel=1e-6):
    return rel * np.maximum(1.0, np.abs(values))


def central_difference(fun, point, h=None):
    """Central-difference gradient of scalar ``fun`` at ``point`` (1-D).

    ``h`` is a scalar or per-component step; by default
    ``1e-6 * max(1, |point_j|)``.
    """
    point = np.asarray(point, dtype=float)
    steps = fd_step(point) if h is None else np.broadcast_to(np.asarray(h, dtype=float), point.shape)
    if np.any(steps <= 0) or not np.all(np.isfinite(steps)):
        raise InvalidInputError("finite-difference step must be positive")
    grad = np.empty_like(point)
    for j in range(point.size):
        e = np.zeros_like(point)
        e[j] = steps[j]
        grad[j] = (float(fun(point + e)) - float(fun(point - e))) / (2 * steps[j])
    return grad


def fd_grad_state(state, u, alpha, params, weights, t, kind, h=None, fun=None):
    """Central-difference ``dH/dx``; verification oracle for :func:`adjoint_rhs`.

    ``fun`` replaces the Hamiltonian with any scalar function of the state
    (used to test the differencing itself).
    """
    if h is not None and np.any(np.asarray(h) <= 0):
        raise InvalidInputError("finite-difference step must be positive")
    x = as_state(state)
    if fun is None:
        def fun(y):
            return hamiltonian(y, u, alpha, params, weights, t, kind)
    return central_difference(fun, x, h)


def fd_grad_control(state, u, alpha, params, weights, t, kind, h=None):
    """Central-difference ``dH/du``; verification oracle for :func:`hamiltonian_grad_u`."""
    if h is not None and np.any(np.asarray(h) <= 0):
        raise InvalidInputError("finite-difference step must be positive")
    u = as_control(u)

    def fun(v):
        return hamiltonian(state, v, alpha, params, weights, t, kind)

    return central_difference(fun, u, h)

