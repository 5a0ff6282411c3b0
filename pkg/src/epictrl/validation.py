"""Input coercion helpers used by the estimator front end."""

import os

import numpy as np

from .exceptions import InvalidInputError, ShapeError
from .scenario import Scenario, load_scenario, parse_scenario, scenario_from_dict


def check_scenario(scenario):
    """Accept a :class:`Scenario`, a decoded dict, JSON text or a path to a JSON file."""
    if isinstance(scenario, Scenario):
        return scenario
    if isinstance(scenario, dict):
        return scenario_from_dict(scenario)
    if isinstance(scenario, (str, os.PathLike)):
        text = os.fspath(scenario)
        if text.lstrip().startswith("{"):
            return parse_scenario(text)
        return load_scenario(text)
    raise InvalidInputError(f"cannot interpret {type(scenario).__name__} as a scenario")


def check_schedule_values(values, scenario):
    """Validate a raw ``(steps + 1, 9)`` control array against the scenario's grid and bounds."""
    u = np.asarray(values, dtype=float)
    expected = (scenario.steps + 1, 9)
    if u.shape != expected:
        raise ShapeError(f"control array must have shape {expected}, got {u.shape}")
    if not np.all(np.isfinite(u)):
        raise InvalidInputError("control array contains non-finite values")
    bounds = np.asarray(scenario.bounds)
    if np.any(u < 0) or np.any(u > bounds):
        raise InvalidInputError("control values must lie within [0, u_max]")
    return u
