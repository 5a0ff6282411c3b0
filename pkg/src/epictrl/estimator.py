"""scikit-learn style front end for the forward-backward sweep.

``fit`` takes a scenario (object, dict, JSON text or path) in place of a
design matrix and learns the optimal control schedule; ``predict`` replays
that schedule on a scenario with the same grid.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .objectives import ObjectiveKind, evaluate_objective
from .scenario import SweepOptions
from .solver import ControlSchedule, forward_backward_sweep, integrate_forward
from .validation import check_scenario, check_schedule_values


class PMPController(BaseEstimator):
    """Optimal intervention schedule via Pontryagin's principle.

    Parameters
    ----------
    objective : {"cost", "effectiveness", "feasibility"}
    max_iters, tol, relaxation, singular_band, discount_in_update
        Sweep settings; ``None`` keeps the value from the scenario's
        ``solver`` section.

    Attributes
    ----------
    solution_ : Solution
    controls_ : ndarray of shape (steps + 1, 9)
    objective_ : float
    n_iter_ : int
    converged_ : bool
    """

    def __init__(
        self,
        objective="cost",
        max_iters=None,
        tol=None,
        relaxation=None,
        singular_band=None,
        discount_in_update=None,
    ):
        self.objective = objective
        self.max_iters = max_iters
        self.tol = tol
        self.relaxation = relaxation
        self.singular_band = singular_band
        self.discount_in_update = discount_in_update

    def _options(self, scenario):
        base = scenario.solver
        pick = lambda mine, theirs: theirs if mine is None else mine  # noqa: E731
        return SweepOptions(
            max_iters=pick(self.max_iters, base.max_iters),
            tol=pick(self.tol, base.tol),
            relaxation=pick(self.relaxation, base.relaxation),
            singular_band=pick(self.singular_band, base.singular_band),
            discount_in_update=pick(self.discount_in_update, base.discount_in_update),
        )

    def fit(self, scenario, y=None):
        scenario = check_scenario(scenario)
        kind = ObjectiveKind.parse(self.objective)
        solution = forward_backward_sweep(scenario, kind, self._options(scenario))
        self.scenario_ = scenario
        self.solution_ = solution
        self.controls_ = np.array(solution.controls.values)
        self.objective_ = solution.objective
        self.n_iter_ = solution.iterations
        self.converged_ = solution.converged
        return self

    def _schedule(self, scenario):
        values = check_schedule_values(self.controls_, scenario)
        return ControlSchedule(np.linspace(0.0, scenario.horizon, scenario.steps + 1), values)

    def predict(self, scenario=None):
        """State trajectory ``(steps + 1, 7)`` under the learned schedule."""
        check_is_fitted(self, "controls_")
        scenario = self.scenario_ if scenario is None else check_scenario(scenario)
        return integrate_forward(scenario, self._schedule(scenario)).values

    def transform(self, scenario=None):
        """The learned control schedule ``(steps + 1, 9)``."""
        check_is_fitted(self, "controls_")
        return np.array(self.controls_)

    def score(self, scenario=None, y=None):
        """Objective of the learned schedule, signed so that larger is better."""
        check_is_fitted(self, "controls_")
        scenario = self.scenario_ if scenario is None else check_scenario(scenario)
        kind = ObjectiveKind.parse(self.objective)
        schedule = self._schedule(scenario)
        x = integrate_forward(scenario, schedule)
        value = evaluate_objective(x.values, schedule.values, scenario.weights, kind, scenario.horizon)
        return value if kind.maximize else -value
