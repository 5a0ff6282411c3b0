"""Batch command line: ``epictrl simulate|optimize|check|compare``.

Exit codes: 0 success, 1 validation or usage error, 2 non-convergence,
3 divergence.
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .exceptions import DivergenceError, InvalidInputError
from .io import dumps_json, summarize, summarize_solution, write_trajectory_csv
from .objectives import ObjectiveKind, check_existence, evaluate_objective
from .scenario import load_scenario
from .solver import ControlSchedule, forward_backward_sweep, integrate_forward

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2
EXIT_DIVERGED = 3

OBJECTIVE_HELP = (
    "objective to optimize (default: cost). cost is minimized; effectiveness and "
    "feasibility are maximized. Note that u2 ('nothing') increases exposure in the "
    "dynamics, and exposure/relapse multipliers are not clamped when control sums exceed 1."
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser():
    parser = _Parser(prog="epictrl", description="Optimal intervention schedules for a 7-compartment epidemic model.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, objective=True):
        p.add_argument("--scenario", action="append", required=True, metavar="PATH",
                       help="scenario JSON file; repeat to run several scenarios")
        p.add_argument("--out", default="out", metavar="DIR", help="output directory (default: out)")
        if objective:
            p.add_argument("--objective", default="cost", choices=[k.value for k in ObjectiveKind], help=OBJECTIVE_HELP)
        return p

    sim = common(sub.add_parser("simulate", help="integrate the dynamics under a fixed schedule"), objective=False)
    sim.add_argument("--uncontrolled", action="store_true", help="integrate the intervention-free model")
    sim.add_argument("--controls", default=None, metavar="U1,...,U9",
                     help="constant control values (default: all zero)")

    common(sub.add_parser("optimize", help="run the forward-backward sweep"))
    check = sub.add_parser("check", help="print the existence-condition report")
    check.add_argument("--scenario", action="append", required=True, metavar="PATH")
    check.add_argument("--objective", default="cost", choices=[k.value for k in ObjectiveKind], help=OBJECTIVE_HELP)

    cmp_ = common(sub.add_parser("compare", help="optimize and compare with the zero-control baseline"))
    for p in (cmp_, sub.choices["optimize"]):
        p.add_argument("--jobs", type=int, default=1, metavar="K", help="worker processes across scenarios")
    return parser


def _write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _outdir(base, path, many):
    if not many:
        return base
    return os.path.join(base, os.path.splitext(os.path.basename(path))[0])


def _parse_controls(text):
    if text is None:
        return np.zeros(9)
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise InvalidInputError(f"--controls must be 9 comma-separated numbers, got {text!r}") from None
    if len(values) != 9:
        raise InvalidInputError(f"--controls needs 9 values, got {len(values)}")
    return np.array(values)


def run_simulate(path, out, uncontrolled, controls):
    scenario = load_scenario(path)
    u = _parse_controls(controls)
    bounds = np.asarray(scenario.bounds)
    if np.any(u < 0) or np.any(u > bounds):
        raise InvalidInputError("--controls must lie within the scenario bounds")
    schedule = ControlSchedule.constant(scenario.horizon, scenario.steps, u)
    traj = integrate_forward(scenario, schedule, controlled=not uncontrolled)
    _write(os.path.join(out, "trajectory.csv"),
           write_trajectory_csv(times=traj.times, states=traj.values, controls=schedule.values))
    notes = [f"state has negative components at {len(traj.negative_steps)} node(s)"] if traj.negative_steps else []
    summary = summarize("simulate", float("nan"), 0, True, traj, schedule.values, scenario.params, notes)
    doc = summary.to_dict()
    doc["value"] = None
    doc["model"] = "uncontrolled" if uncontrolled else "controlled"
    _write(os.path.join(out, "summary.json"), dumps_json(doc))
    return EXIT_OK


def run_optimize(path, out, objective):
    scenario = load_scenario(path)
    solution = forward_backward_sweep(scenario, objective)
    _write(os.path.join(out, "trajectory.csv"), write_trajectory_csv(solution))
    _write(os.path.join(out, "summary.json"), dumps_json(summarize_solution(solution, scenario.params).to_dict()))
    return EXIT_OK if solution.converged else EXIT_NOT_CONVERGED


def run_compare(path, out, objective):
    scenario = load_scenario(path)
    kind = ObjectiveKind.parse(objective)
    solution = forward_backward_sweep(scenario, kind)
    baseline_u = ControlSchedule.zeros(scenario.horizon, scenario.steps)
    baseline = integrate_forward(scenario, baseline_u)
    baseline_value = evaluate_objective(baseline.values, baseline_u.values, scenario.weights, kind, scenario.horizon)
    opt = summarize_solution(solution, scenario.params)
    base = summarize(kind, baseline_value, 0, True, baseline, baseline_u.values, scenario.params)
    doc = {
        "objective": kind.value,
        "sense": kind.sense,
        "optimized": opt.to_dict(),
        "baseline": base.to_dict(),
        "improved": bool(opt.value >= baseline_value if kind.maximize else opt.value <= baseline_value),
        "infections_averted": base.infections - opt.infections,
        "deaths_averted": base.deaths - opt.deaths,
    }
    _write(os.path.join(out, "trajectory.csv"), write_trajectory_csv(solution))
    _write(os.path.join(out, "baseline.csv"),
           write_trajectory_csv(times=baseline.times, states=baseline.values, controls=baseline_u.values))
    _write(os.path.join(out, "summary.json"), dumps_json(doc))
    return EXIT_OK if solution.converged else EXIT_NOT_CONVERGED


def run_check(path, objective):
    scenario = load_scenario(path)
    report = check_existence(scenario, objective)
    doc = report.to_dict()
    doc["scenario"] = path
    doc["objective"] = ObjectiveKind.parse(objective).value
    sys.stdout.write(dumps_json(doc))
    return EXIT_OK if report.passed else EXIT_INVALID


def _guarded(fn, *args):
    try:
        return fn(*args)
    except DivergenceError as exc:
        sys.stderr.write(f"epictrl: divergence: {exc}\n")
        return EXIT_DIVERGED
    except (InvalidInputError, OSError) as exc:
        sys.stderr.write(f"epictrl: {exc}\n")
        return EXIT_INVALID


def _fan_out(jobs, calls):
    if jobs > 1 and len(calls) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_guarded, fn, *args) for fn, args in calls]
            return [f.result() for f in futures]
    return [_guarded(fn, *args) for fn, args in calls]


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_INVALID
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID

    paths = args.scenario
    many = len(paths) > 1
    if args.command == "check":
        codes = [_guarded(run_check, p, args.objective) for p in paths]
    elif args.command == "simulate":
        codes = [
            _guarded(run_simulate, p, _outdir(args.out, p, many), args.uncontrolled, args.controls) for p in paths
        ]
    else:
        if args.jobs < 1:
            sys.stderr.write("epictrl: --jobs must be >= 1\n")
            return EXIT_INVALID
        fn = run_optimize if args.command == "optimize" else run_compare
        codes = _fan_out(args.jobs, [(fn, (p, _outdir(args.out, p, many), args.objective)) for p in paths])
    return max(codes)


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
