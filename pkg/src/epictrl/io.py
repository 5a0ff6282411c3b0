"""Trajectory CSV and run-summary serialization."""

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import COMPARTMENTS, N_CONTROLS

CONTROL_COLUMNS = tuple(f"u{i}" for i in range(1, N_CONTROLS + 1))
ADJOINT_COLUMNS = tuple(f"alpha{i}" for i in range(1, 8))
TRAJECTORY_HEADER = ("t",) + COMPARTMENTS + CONTROL_COLUMNS + ADJOINT_COLUMNS


def _fmt(value):
    # repr gives the shortest string that parses back to the same double
    return repr(float(value))


def write_trajectory_csv(solution=None, *, times=None, states=None, controls=None, adjoint=None):
    """Render a solution as CSV text (LF line endings, round-trip precision).

    Pass a :class:`~epictrl.solver.Solution`, or the arrays directly; the
    ``alpha`` columns are omitted when no costate is supplied.
    """
    if solution is not None:
        times = solution.state.times
        states = solution.state.values
        controls = solution.controls.values
        adjoint = solution.adjoint.values
    times = np.asarray(times, dtype=float)
    blocks = [times[:, None], np.asarray(states, dtype=float), np.asarray(controls, dtype=float)]
    header = ("t",) + COMPARTMENTS + CONTROL_COLUMNS
    if adjoint is not None:
        blocks.append(np.asarray(adjoint, dtype=float))
        header = TRAJECTORY_HEADER
    table = np.hstack(blocks)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in table:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_trajectory_csv(text):
    """Parse CSV produced by :func:`write_trajectory_csv` into ``(header, array)``."""
    rows = list(csv.reader(io.StringIO(text)))
    header = tuple(rows[0])
    data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    return header, data.reshape(len(rows) - 1, len(header))


@dataclass
class RunSummary:
    objective: str
    value: float
    iterations: int
    converged: bool
    deaths: float
    peak_hospitalized: float
    peak_symptomatic: float
    infections: float
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def cumulative_infections(times, states, controls, params):
    """Trapezoid integral of the S -> E flow along a trajectory."""
    x = np.asarray(states, dtype=float).T
    u = np.asarray(controls, dtype=float).T
    S, _, Ia, Is, H = x[0], x[1], x[2], x[3], x[4]
    pressure = params.zeta_ia_s * Ia + params.zeta_is_s * Is + params.zeta_h_s * H
    factor = 1 - u[0] + u[1] - u[2] - u[3] - u[4]
    return float(np.trapezoid(factor * pressure * S / params.N, times))


def summarize(kind, value, iterations, converged, trajectory, controls, params, notes=()):
    x = trajectory.values
    return RunSummary(
        objective=str(getattr(kind, "value", kind)),
        value=float(value),
        iterations=int(iterations),
        converged=bool(converged),
        deaths=float(x[-1, 6]),
        peak_hospitalized=float(x[:, 4].max()),
        peak_symptomatic=float(x[:, 3].max()),
        infections=cumulative_infections(trajectory.times, x, controls, params),
        warnings=list(notes),
    )


def summarize_solution(solution, params):
    return summarize(
        solution.kind,
        solution.objective,
        solution.iterations,
        solution.converged,
        solution.state,
        solution.controls.values,
        params,
        solution.warnings,
    )


def dumps_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
