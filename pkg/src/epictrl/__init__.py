"""Intervention schedules for a seven-compartment epidemic model via Pontryagin's principle."""

from .exceptions import (
    ConfigurationError,
    DivergenceError,
    EpictrlError,
    InvalidInputError,
    ShapeError,
)
from .model import (
    CompartmentState,
    ModelParams,
    f1_affine,
    f2_affine,
    force_of_infection,
    norm_bounds,
    rhs_controlled,
    rhs_uncontrolled,
)
from .objectives import ExistenceReport, ObjectiveKind, ObjectiveWeights, check_existence, evaluate_objective
from .scenario import Scenario, SweepOptions, dump_scenario, load_scenario, parse_scenario, reference_scenario
from .solver import (
    ControlSchedule,
    Solution,
    Trajectory,
    forward_backward_sweep,
    integrate_backward,
    integrate_forward,
)

__version__ = "0.1.0"

__all__ = [
    "CompartmentState",
    "ConfigurationError",
    "ControlSchedule",
    "DivergenceError",
    "EpictrlError",
    "ExistenceReport",
    "InvalidInputError",
    "ModelParams",
    "ObjectiveKind",
    "ObjectiveWeights",
    "Scenario",
    "ShapeError",
    "Solution",
    "SweepOptions",
    "Trajectory",
    "check_existence",
    "dump_scenario",
    "evaluate_objective",
    "f1_affine",
    "f2_affine",
    "force_of_infection",
    "forward_backward_sweep",
    "integrate_backward",
    "integrate_forward",
    "load_scenario",
    "norm_bounds",
    "parse_scenario",
    "reference_scenario",
    "rhs_controlled",
    "rhs_uncontrolled",
]
