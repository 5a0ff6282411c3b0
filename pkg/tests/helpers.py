"""Shared builders and hypothesis strategies for the test suite."""

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from epictrl import ModelParams, ObjectiveWeights, Scenario
from epictrl.model import CompartmentState

settings.register_profile("epictrl", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("epictrl")

RATE_KEYS = (
    "tau_ei_a", "tau_ia_is", "tau_ia_r", "tau_is_r", "tau_is_h", "tau_is_d",
    "tau_h_r", "tau_h_d", "tau_r_s", "zeta_ia_s", "zeta_is_s", "zeta_h_s",
)

# the worked example used throughout the model tests
EXAMPLE_PARAMS = dict(
    tau_ei_a=0.2, tau_ia_is=0.1, tau_ia_r=0.1, tau_is_r=0.1, tau_is_h=0.05, tau_is_d=0.02,
    tau_h_r=0.1, tau_h_d=0.05, tau_r_s=0.01, zeta_ia_s=0.1, zeta_is_s=0.15, zeta_h_s=0.05, N=100.0,
)
EXAMPLE_STATE = (50.0, 10.0, 20.0, 10.0, 5.0, 5.0, 0.0)


def make_params(**overrides):
    values = {k: 0.0 for k in RATE_KEYS}
    values["N"] = 100.0
    values.update(overrides)
    return ModelParams(**values)


def small_scenario(steps=200, horizon=30.0, infected=True, **weights):
    params = ModelParams(**{**EXAMPLE_PARAMS, "N": 1000.0})
    if infected:
        initial = CompartmentState(970.0, 15.0, 10.0, 5.0, 0.0, 0.0, 0.0)
    else:
        initial = CompartmentState(1000.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    w = ObjectiveWeights(**weights) if weights else ObjectiveWeights(lambdas=(1e-3,) * 4, b=(1.0,) * 9, sigma=0.01)
    return Scenario(params, initial, horizon, steps, w, (0.3, 0.2, 0.2, 0.2, 0.2, 0.5, 0.5, 0.4, 0.5))


def random_params(rng, N=None):
    values = {k: float(rng.uniform(0.0, 0.5)) for k in RATE_KEYS}
    values["N"] = float(rng.uniform(10.0, 1e6)) if N is None else N
    return ModelParams(**values)


def random_scenario(rng, steps=400, horizon=60.0):
    params = random_params(rng)
    share = rng.dirichlet(np.ones(7))
    initial = CompartmentState(*(share * params.N))
    bounds = tuple(rng.uniform(0.05, 0.25, 9))
    return Scenario(params, initial, horizon, steps, ObjectiveWeights(), bounds)


rates = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def params_strategy(draw):
    values = {k: draw(rates) for k in RATE_KEYS}
    values["N"] = draw(st.floats(1.0, 1e6, allow_nan=False))
    return ModelParams(**values)


@st.composite
def state_strategy(draw, N):
    return np.array([draw(st.floats(0.0, N, allow_nan=False)) for _ in range(7)])


controls_strategy = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=9, max_size=9).map(np.array)


# criterion number -> one-line verdict, printed by the terminal-summary hook
ACCEPTANCE = {}


def verdict(number, title, ok, detail):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok
