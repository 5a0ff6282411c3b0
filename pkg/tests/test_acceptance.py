"""The eleven acceptance criteria, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict with the measured figure;
the lines are repeated together at the end of the pytest run.
"""

import itertools
import math

import numpy as np
import pytest

from epictrl import (
    ControlSchedule,
    ObjectiveWeights,
    check_existence,
    dump_scenario,
    evaluate_objective,
    f1_affine,
    f2_affine,
    forward_backward_sweep,
    integrate_forward,
    parse_scenario,
    rhs_controlled,
    rhs_uncontrolled,
)
from epictrl.adjoint import adjoint_rhs, fd_grad_state, hamiltonian, hamiltonian_grad_u
from epictrl.cli import main
from epictrl.model import count_bound_violations
from epictrl.objectives import default_seed, lagrangian_cost, lagrangian_effectiveness
from helpers import random_params, random_scenario, small_scenario, verdict


@pytest.fixture(scope="module")
def cost_run(reference):
    return forward_backward_sweep(reference, "cost")


@pytest.fixture(scope="module")
def effectiveness_run(reference):
    return forward_backward_sweep(reference, "effectiveness")


def test_01_conservation(rng):
    sc = random_scenario(rng, steps=2000, horizon=180.0)
    u = ControlSchedule(np.linspace(0, sc.horizon, sc.steps + 1),
                        rng.uniform(0, 1, (sc.steps + 1, 9)) * np.array(sc.bounds))
    x = integrate_forward(sc, u).values
    worst = float(np.max(np.abs(x.sum(axis=1) - sc.params.N)) / sc.params.N)
    assert verdict(1, "conservation", worst <= 1e-9, f"max |sum - N| / N = {worst:.2e} (limit 1e-9)")


def test_02_affine_decomposition(rng):
    worst = 0.0
    for _ in range(1000):
        p = random_params(rng)
        x = rng.uniform(0, p.N, 7)
        u = rng.uniform(0, 1, 9)
        diff = rhs_controlled(x, u, p) - (f1_affine(x, p) + f2_affine(x, p) @ u)
        worst = max(worst, float(np.max(np.abs(diff)) / p.N))
    assert verdict(2, "affine decomposition", worst <= 1e-12, f"max error / N = {worst:.2e} over 1000 draws (limit 1e-12)")


def test_03_zero_control_discrepancy(rng):
    worst = 0.0
    for _ in range(1000):
        p = random_params(rng)
        x = rng.uniform(0, p.N, 7)
        diff = rhs_controlled(x, np.zeros(9), p) - rhs_uncontrolled(x, p)
        expected = np.zeros(7)
        expected[4] = p.tau_h_r * x[4]
        expected[5] = -p.tau_h_r * x[4]
        worst = max(worst, float(np.max(np.abs(diff - expected)) / p.N))
    ok = worst <= 1e-12
    assert verdict(3, "zero-control discrepancy", ok, f"max deviation from (+tau_h_r H, -tau_h_r H) / N = {worst:.2e}")


def test_04_adjoint_finite_differences(reference, rng):
    p, w = reference.params, reference.weights
    bounds = np.array(reference.bounds)
    worst = {}
    for kind in ("cost", "effectiveness", "feasibility"):
        worst[kind] = 0.0
        for _ in range(100):
            x = rng.uniform(0, p.N, 7)
            u = rng.uniform(0, 1, 9) * bounds
            a = rng.normal(0, 1, 7)
            t = rng.uniform(0, reference.horizon)
            an = adjoint_rhs(x, u, a, p, w, t, kind)
            fd = -fd_grad_state(x, u, a, p, w, t, kind)
            worst[kind] = max(worst[kind], float(np.max(np.abs(an - fd)) / np.max(np.abs(an))))
    top = max(worst.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert verdict(4, "adjoint vs finite differences", top <= 1e-5, f"max relative error {detail} (limit 1e-5)")


def test_05_stationarity(reference, cost_run):
    sol = cost_run
    p, w = reference.params, reference.weights
    X, A, U = sol.state.values.T, sol.adjoint.values.T, sol.controls.values.T
    t = sol.state.times
    g = hamiltonian_grad_u(X, U, A, p, w, t, "cost")
    H = hamiltonian(X, U, A, p, w, t, "cost")
    bounds = np.array(reference.bounds)[:, None]
    interior = (U > 0) & (U < bounds)
    ratio = float(np.max(np.where(interior, np.abs(g) / (1e-3 * (1 + np.abs(H))), 0.0)))
    wrong = int(np.sum((U == 0) & (g < 0)) + np.sum((U == bounds) & (g > 0)))
    ok = sol.converged and ratio <= 1 and wrong == 0
    detail = (f"converged={sol.converged} in {sol.iterations} its, interior nodes {int(interior.sum())}, "
              f"max |dH/du| / 1e-3(1+|H|) = {ratio:.3f}, wrong-sign boundary nodes {wrong}")
    assert verdict(5, "stationarity (cost)", ok, detail)


def test_06_bang_bang(reference, effectiveness_run, rng):
    sol = effectiveness_run
    p, w = reference.params, reference.weights
    X, A, U = sol.state.values, sol.adjoint.values, sol.controls.values
    t = sol.state.times
    verts = (np.array(list(itertools.product((0.0, 1.0), repeat=9))) * np.array(reference.bounds)).T
    worst = 0.0
    nodes = rng.choice(t.size, 40, replace=False)
    for j in nodes:
        xs = np.repeat(X[j][:, None], verts.shape[1], axis=1)
        As = np.repeat(A[j][:, None], verts.shape[1], axis=1)
        best = float(hamiltonian(xs, verts, As, p, w, t[j], "effectiveness").max())
        chosen = float(hamiltonian(X[j], U[j], A[j], p, w, t[j], "effectiveness"))
        worst = max(worst, (best - chosen) / max(1.0, abs(best)))
    ok = sol.converged and worst <= 1e-9
    assert verdict(6, "bang-bang optimality", ok,
                   f"converged={sol.converged}, worst vertex shortfall {worst:.1e} on {nodes.size} nodes (limit 1e-9)")


def test_07_beats_baseline(reference, cost_run, effectiveness_run):
    zero = ControlSchedule.zeros(reference.horizon, reference.steps)
    x0 = integrate_forward(reference, zero).values
    j1_0 = evaluate_objective(x0, zero.values, reference.weights, "cost", reference.horizon)
    j2_0 = evaluate_objective(x0, zero.values, reference.weights, "effectiveness", reference.horizon)
    j1, j2 = cost_run.objective, effectiveness_run.objective
    ok = (cost_run.converged and effectiveness_run.converged
          and j1 <= j1_0 + 1e-6 * abs(j1_0) and j2 >= j2_0 - 1e-6 * abs(j2_0))
    assert verdict(7, "optimizer beats baseline", ok,
                   f"J1 {j1:.6g} vs zero {j1_0:.6g}; J2 {j2:.6g} vs zero {j2_0:.6g}")


def test_08_convergence_orders():
    def schedule(sc, n):
        t = np.linspace(0, sc.horizon, n + 1)
        knots = np.linspace(0, sc.horizon, 11)
        shape = np.interp(t, knots, 0.5 + 0.5 * np.sin(knots / 4))
        return ControlSchedule(t, np.outer(shape, [0.1, 0.02, 0.05, 0.05, 0.05, 0.2, 0.1, 0.1, 0.3]))

    ref = integrate_forward(small_scenario(steps=800), schedule(small_scenario(steps=800), 800)).values
    errs = []
    for n in (50, 100):
        sc = small_scenario(steps=n)
        errs.append(np.max(np.abs(integrate_forward(sc, schedule(sc, n)).values - ref[:: 800 // n])))
    rk4 = errs[0] / errs[1]

    T = 3.0
    w = ObjectiveWeights(lambdas=(1, 0, 0, 0), b=(2.0,) + (1.0,) * 8)
    exact = T + (1 - math.cos(T)) + T / 3

    def quad_err(n):
        t = np.linspace(0, T, n + 1)
        x = np.zeros((n + 1, 7))
        x[:, 1] = 1 + np.sin(t)
        u = np.zeros((n + 1, 9))
        u[:, 0] = t / T
        return abs(evaluate_objective(x, u, w, "cost", T) - exact)

    trap = quad_err(40) / quad_err(80)
    ok = rk4 >= 12 and trap >= 3.5
    assert verdict(8, "convergence orders", ok, f"RK4 error ratio {rk4:.2f} (floor 12), trapezoid ratio {trap:.2f} (floor 3.5)")


def test_09_existence_report(reference):
    report = check_existence(reference, "cost", samples=1000)
    rng = np.random.default_rng(default_seed())
    states = rng.uniform(0, reference.params.N, (7, 1000))
    v1, v2 = count_bound_violations(reference.params, states)
    ok = report.passed and v1 == 0 and v2 == 0 and report.bound_violations == 0
    conds = ", ".join(f"{k}={v}" for k, v in report.conditions.items())
    assert verdict(9, "existence report", ok, f"{conds}; norm-bound violations f1 {v1}, f2 {v2} of 1000")


def test_10_convexity_and_linearity(reference, rng):
    w = reference.weights
    bounds = np.array(reference.bounds)
    worst_gap = worst_aff = 0.0
    for _ in range(1000):
        x = rng.uniform(0, reference.params.N, 7)
        v = rng.uniform(0, 1, 9) * bounds
        z = rng.uniform(0, 1, 9) * bounds
        a = rng.uniform()
        t = rng.uniform(0, reference.horizon)
        gap = lagrangian_cost(x, a * v + (1 - a) * z, w) - a * lagrangian_cost(x, v, w) - (1 - a) * lagrangian_cost(x, z, w)
        exact = 0.5 * a * (a - 1) * float(np.sum(w.b_array * (v - z) ** 2))
        scale = 1 + abs(lagrangian_cost(x, v, w)) + abs(lagrangian_cost(x, z, w))
        worst_gap = max(worst_gap, abs(gap - exact) / scale)
        mixed = lagrangian_effectiveness(x, a * v + (1 - a) * z, w, t)
        chord = a * lagrangian_effectiveness(x, v, w, t) + (1 - a) * lagrangian_effectiveness(x, z, w, t)
        worst_aff = max(worst_aff, abs(mixed - chord) / (1 + abs(chord)))
    ok = worst_gap <= 1e-12 and worst_aff <= 1e-12
    assert verdict(10, "convexity / linearity identities", ok,
                   f"convexity-gap error {worst_gap:.1e}, affinity error {worst_aff:.1e} over 1000 triples (limit 1e-12)")


def test_11_determinism_and_round_trip(reference, tmp_path):
    path = tmp_path / "reference.json"
    path.write_text(dump_scenario(reference), encoding="utf-8")
    codes = [main(["optimize", "--scenario", str(path), "--out", str(tmp_path / run)]) for run in ("a", "b")]
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
               for f in ("trajectory.csv", "summary.json"))
    round_trip = parse_scenario(dump_scenario(reference)) == reference
    ok = codes == [0, 0] and same and round_trip
    assert verdict(11, "determinism and round-trip", ok,
                   f"exit codes {codes}, byte-identical outputs {same}, parse(emit) identity {round_trip}")
