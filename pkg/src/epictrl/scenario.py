"""Scenario documents: validated loading and lossless re-emission.

A scenario is one JSON object::

    {
      "params":  {"tau_ei_a": ..., ..., "zeta_h_s": ..., "N": ...},
      "initial": {"S": ..., "E": ..., "Ia": ..., "Is": ..., "H": ..., "R": ..., "D": ...},
      "horizon": 90,
      "steps": 1000,
      "weights": {"lambda1": ..., ..., "lambda4": ..., "b1": ..., ..., "b9": ..., "sigma": ...},
      "bounds": [1, 1, 1, 1, 1, 1, 1, 1, 1],
      "solver": {"max_iters": 500, "tol": 1e-4, "relaxation": 0.5,
                 "singular_band": 1e-9, "discount_in_update": true}
    }

``params``, ``initial`` and ``horizon`` are required; everything else has
defaults.
"""

import json
import math
from dataclasses import dataclass, field

from .exceptions import ConfigurationError, InvalidInputError
from .model import COMPARTMENTS, N_CONTROLS, CompartmentState, ModelParams
from .objectives import ObjectiveWeights

PARAM_KEYS = (
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
    "N",
)
WEIGHT_KEYS = ("lambda1", "lambda2", "lambda3", "lambda4") + tuple(f"b{i}" for i in range(1, 10)) + ("sigma",)
SOLVER_KEYS = ("max_iters", "tol", "relaxation", "singular_band", "discount_in_update")
TOP_KEYS = ("params", "initial", "horizon", "steps", "weights", "bounds", "solver")

DEFAULT_STEPS = 1000
DEFAULT_WEIGHTS = {"lambda1": 1.0, "lambda2": 1.0, "lambda3": 1.0, "lambda4": 1.0, "sigma": 0.0}
DEFAULT_WEIGHTS.update({f"b{i}": 1.0 for i in range(1, 10)})


@dataclass(frozen=True)
class SweepOptions:
    """Forward-backward sweep settings.

    ``tol`` bounds the max-norm change between successive control iterates;
    ``relaxation`` is the weight given to the freshly updated controls.
    """

    max_iters: int = 500
    tol: float = 1e-4
    relaxation: float = 0.5
    singular_band: float = 1e-9
    discount_in_update: bool = True

    def __post_init__(self):
        if isinstance(self.max_iters, bool) or int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidInputError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise InvalidInputError(f"tol must be positive, got {self.tol!r}")
        if not (0 < self.relaxation <= 1):
            raise InvalidInputError(f"relaxation must lie in (0, 1], got {self.relaxation!r}")
        if not (math.isfinite(self.singular_band) and self.singular_band >= 0):
            raise InvalidInputError(f"singular_band must be >= 0, got {self.singular_band!r}")
        object.__setattr__(self, "max_iters", int(self.max_iters))


@dataclass(frozen=True)
class Scenario:
    params: ModelParams
    initial: CompartmentState
    horizon: float
    steps: int = DEFAULT_STEPS
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights)
    bounds: tuple = (1.0,) * N_CONTROLS
    solver: SweepOptions = field(default_factory=SweepOptions)

    def __post_init__(self):
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise InvalidInputError(f"horizon must be positive and finite, got {self.horizon!r}")
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or self.steps < 2:
            raise InvalidInputError(f"steps must be an integer >= 2, got {self.steps!r}")
        bounds = tuple(float(b) for b in self.bounds)
        if len(bounds) != N_CONTROLS:
            raise InvalidInputError(f"expected 9 control bounds, got {len(bounds)}")
        for i, b in enumerate(bounds, 1):
            if not (math.isfinite(b) and 0 < b <= 1):
                raise InvalidInputError(f"bound for u{i} must lie in (0, 1], got {b!r}")
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "steps", int(self.steps))
        self.initial.validate(self.params.N)

    @property
    def dt(self):
        return self.horizon / self.steps

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise ConfigurationError(f"expected a finite number, got {value!r}", path)
    return float(value)


def _section(doc, key, required):
    if key not in doc:
        if required:
            raise ConfigurationError("missing required key", key)
        return {}
    value = doc[key]
    if not isinstance(value, dict):
        raise ConfigurationError(f"expected an object, got {type(value).__name__}", key)
    return value


def _reject_unknown(section, allowed, prefix):
    for key in section:
        if key not in allowed:
            path = f"{prefix}.{key}" if prefix else key
            raise ConfigurationError("unknown key", path)


def scenario_from_dict(doc):
    """Build a :class:`Scenario` from a decoded JSON object."""
    if not isinstance(doc, dict):
        raise ConfigurationError("scenario must be a JSON object")
    _reject_unknown(doc, TOP_KEYS, "")

    params_doc = _section(doc, "params", required=True)
    _reject_unknown(params_doc, PARAM_KEYS, "params")
    values = {}
    for key in PARAM_KEYS:
        path = f"params.{key}"
        if key not in params_doc:
            raise ConfigurationError("missing required key", path)
        v = _number(params_doc[key], path)
        if key == "N":
            if v <= 0:
                raise ConfigurationError(f"must be > 0, got {v!r}", path)
        elif not 0 <= v <= 1:
            raise ConfigurationError(f"must lie in [0, 1], got {v!r}", path)
        values[key] = v
    params = ModelParams(**values)

    init_doc = _section(doc, "initial", required=True)
    _reject_unknown(init_doc, COMPARTMENTS, "initial")
    counts = []
    for key in COMPARTMENTS:
        path = f"initial.{key}"
        if key not in init_doc:
            raise ConfigurationError("missing required key", path)
        v = _number(init_doc[key], path)
        if v < 0:
            raise ConfigurationError(f"must be >= 0, got {v!r}", path)
        counts.append(v)
    total = math.fsum(counts)
    if abs(total - params.N) > 1e-9 * params.N:
        raise ConfigurationError(
            f"compartment sum mismatch: expected {params.N:g} (params.N), found {total:g}", "initial"
        )
    initial = CompartmentState(*counts)

    if "horizon" not in doc:
        raise ConfigurationError("missing required key", "horizon")
    horizon = _number(doc["horizon"], "horizon")
    if horizon <= 0:
        raise ConfigurationError(f"must be > 0, got {horizon!r}", "horizon")

    steps = doc.get("steps", DEFAULT_STEPS)
    if isinstance(steps, bool) or not isinstance(steps, (int, float)) or int(steps) != steps or steps < 2:
        raise ConfigurationError(f"must be an integer >= 2, got {steps!r}", "steps")
    steps = int(steps)

    weights_doc = _section(doc, "weights", required=False)
    _reject_unknown(weights_doc, WEIGHT_KEYS, "weights")
    w = {}
    for key in WEIGHT_KEYS:
        path = f"weights.{key}"
        v = _number(weights_doc.get(key, DEFAULT_WEIGHTS[key]), path)
        if key.startswith("b") and v <= 0:
            raise ConfigurationError(f"must be > 0, got {v!r}", path)
        if not key.startswith("b") and v < 0:
            raise ConfigurationError(f"must be >= 0, got {v!r}", path)
        w[key] = v
    weights = ObjectiveWeights(
        lambdas=tuple(w[f"lambda{i}"] for i in range(1, 5)),
        b=tuple(w[f"b{i}"] for i in range(1, 10)),
        sigma=w["sigma"],
    )

    raw_bounds = doc.get("bounds", [1.0] * N_CONTROLS)
    if not isinstance(raw_bounds, list) or len(raw_bounds) != N_CONTROLS:
        raise ConfigurationError("expected a list of 9 numbers", "bounds")
    bounds = []
    for i, value in enumerate(raw_bounds):
        path = f"bounds[{i}]"
        v = _number(value, path)
        if not 0 < v <= 1:
            raise ConfigurationError(f"must lie in (0, 1], got {v!r}", path)
        bounds.append(v)

    solver_doc = _section(doc, "solver", required=False)
    _reject_unknown(solver_doc, SOLVER_KEYS, "solver")
    defaults = SweepOptions()
    max_iters = solver_doc.get("max_iters", defaults.max_iters)
    if isinstance(max_iters, bool) or not isinstance(max_iters, int) or max_iters < 1:
        raise ConfigurationError(f"must be a positive integer, got {max_iters!r}", "solver.max_iters")
    tol = _number(solver_doc.get("tol", defaults.tol), "solver.tol")
    if tol <= 0:
        raise ConfigurationError(f"must be > 0, got {tol!r}", "solver.tol")
    relaxation = _number(solver_doc.get("relaxation", defaults.relaxation), "solver.relaxation")
    if not 0 < relaxation <= 1:
        raise ConfigurationError(f"must lie in (0, 1], got {relaxation!r}", "solver.relaxation")
    band = _number(solver_doc.get("singular_band", defaults.singular_band), "solver.singular_band")
    if band < 0:
        raise ConfigurationError(f"must be >= 0, got {band!r}", "solver.singular_band")
    discount = solver_doc.get("discount_in_update", defaults.discount_in_update)
    if not isinstance(discount, bool):
        raise ConfigurationError(f"expected true or false, got {discount!r}", "solver.discount_in_update")
    solver = SweepOptions(max_iters, tol, relaxation, band, discount)

    return Scenario(params, initial, horizon, steps, weights, tuple(bounds), solver)


def parse_scenario(text):
    """Parse and validate a JSON scenario document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}") from exc
    return scenario_from_dict(doc)


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def scenario_to_dict(scenario):
    weights = scenario.weights
    w = {f"lambda{i}": v for i, v in enumerate(weights.lambdas, 1)}
    w.update({f"b{i}": v for i, v in enumerate(weights.b, 1)})
    w["sigma"] = weights.sigma
    opts = scenario.solver
    return {
        "params": scenario.params.to_dict(),
        "initial": {k: getattr(scenario.initial, k) for k in COMPARTMENTS},
        "horizon": scenario.horizon,
        "steps": scenario.steps,
        "weights": w,
        "bounds": list(scenario.bounds),
        "solver": {
            "max_iters": opts.max_iters,
            "tol": opts.tol,
            "relaxation": opts.relaxation,
            "singular_band": opts.singular_band,
            "discount_in_update": opts.discount_in_update,
        },
    }


def dump_scenario(scenario):
    """Serialize to JSON text that :func:`parse_scenario` maps back to an equal scenario."""
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def reference_scenario():
    """The bundled desk-scale scenario (N = 1e6, T = 90 days, 2000 steps)."""
    from importlib import resources

    text = resources.files("epictrl").joinpath("data/reference.json").read_text(encoding="utf-8")
    return parse_scenario(text)
