"""Scenario-file driven front end.

A scenario is a TOML file naming a registered system, a task, and the
task's numeric parameters.  Running it produces a trajectory CSV and/or a
plain-text report with one "PASS/FAIL: <check>: <value>" line per
assertion.  Exit statuses: 0 all assertions pass, 1 tolerance failure,
2 input error, 3 numeric error.
"""

from __future__ import annotations

import csv
import inspect
import io
import itertools
import warnings

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib
from pathlib import Path

import numpy as np

from .complete_solutions import (check_local_diffeomorphism, check_round_trip,
                                 conservation_check, first_integrals,
                                 involution_check, transversality_defect,
                                 verify_flavor)
from .dynamics import ConstrainedState, integrate
from .errors import (FrameDegenerateError, InvalidCompleteSolutionError,
                     NonholoError, NumericDomainError, RegularityError,
                     ScenarioError)
from .frames import bracket_generating_rank, structure_coefficients
from .hamilton_jacobi import (Section, denergy_annihilator_residual,
                              energy_pullback, general_hj_residual,
                              restricted_hj_residual)
from .systems import SOLUTION_REGISTRY, SYSTEM_REGISTRY

EXIT_PASS = 0
EXIT_TOLERANCE = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

TASKS = ("integrate", "verify-section", "verify-complete", "geometry")
DEFAULT_TOLERANCE = 1e-6


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def load_scenario(path) -> dict:
    """Parse and validate a scenario file; raises ScenarioError on any defect."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ScenarioError(f"scenario file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"scenario parse error: {exc}") from exc

    head = data.get("scenario")
    if not isinstance(head, dict):
        raise ScenarioError("missing [scenario] section")
    task = head.get("task")
    if task not in TASKS:
        raise ScenarioError(f"unknown task {task!r}; expected one of {TASKS}")
    system = head.get("system")
    if system not in SYSTEM_REGISTRY:
        raise ScenarioError(f"unknown system {system!r}; registered: "
                            f"{sorted(SYSTEM_REGISTRY)}")
    return data


def build_system(data):
    name = data["scenario"]["system"]
    factory = SYSTEM_REGISTRY[name]
    kwargs = {}
    if "analytic" in data["scenario"] and \
            "analytic" in inspect.signature(factory).parameters:
        kwargs["analytic"] = bool(data["scenario"]["analytic"])
    return factory(**kwargs)


def _vector(table, key, length, what):
    try:
        v = np.asarray(table[key], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{what}: missing or malformed '{key}'") from exc
    if v.shape != (length,):
        raise ScenarioError(f"{what}: '{key}' must have length {length}")
    return v


def _grid_points(table, n):
    lo = np.asarray(table.get("grid_min", [-1.0] * n), dtype=float)
    hi = np.asarray(table.get("grid_max", [1.0] * n), dtype=float)
    counts = [int(c) for c in table.get("grid_counts", [5] * n)]
    if not (lo.shape == hi.shape == (n,)) or len(counts) != n:
        raise ScenarioError("grid bounds/counts must match the configuration dimension")
    axes = [np.linspace(lo[i], hi[i], counts[i]) for i in range(n)]
    return [np.array(p) for p in itertools.product(*axes)]


def _build_section(sys, table):
    kind = table.get("kind")
    if kind == "constant":
        values = _vector(table, "values", sys.r, "section")
        return Section(sigma=lambda x: values.copy(),
                       jacobian=lambda x: np.zeros((sys.r, sys.n)))
    solutions = SOLUTION_REGISTRY.get(sys.name.removesuffix("-fd"), {})
    if kind not in solutions:
        raise ScenarioError(f"unknown section kind {kind!r} for system {sys.name!r}")
    lam = _vector(table, "lambda", sys.r, "section")
    return solutions[kind]().section(lam)


class Report:
    """Accumulates PASS/FAIL lines; a report passes iff no FAIL lines."""

    def __init__(self):
        self.lines = []

    def check(self, name, value, tol):
        ok = value < tol
        self.lines.append(f"{'PASS' if ok else 'FAIL'}: {name}: {_fmt(value)}")
        return ok

    def info(self, name, value):
        self.lines.append(f"INFO: {name}: {value}")

    @property
    def passed(self):
        return not any(line.startswith("FAIL") for line in self.lines)

    def text(self):
        return "\n".join(self.lines) + "\n"


def write_trajectory_csv(path, sys, traj, integral_count=0):
    """CSV with columns t, x_1..x_n, y_1..y_r, E, then f_1..f_r if present."""
    header = (["t"] + [f"x_{i + 1}" for i in range(sys.n)]
              + [f"y_{a + 1}" for a in range(sys.r)] + ["E"]
              + [f"f_{i + 1}" for i in range(integral_count)])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for k, t in enumerate(traj.times):
        row = [t, *traj.states[k].x, *traj.states[k].y, traj.energy[k]]
        if integral_count:
            row.extend(traj.first_integrals[k])
        writer.writerow([_fmt(float(v)) for v in row])
    Path(path).write_text(buf.getvalue())


def _task_integrate(sys, data, out_dir, report):
    table = data.get("integrate", {})
    x0 = _vector(table, "x0", sys.n, "integrate")
    if "y0" in table:
        y0 = _vector(table, "y0", sys.r, "integrate")
    elif "section" in table:
        y0 = _build_section(sys, table["section"])(x0)
    else:
        raise ScenarioError("integrate: need 'y0' or a [integrate.section] table")
    T = float(table.get("T", 1.0))
    dt = float(table.get("dt", 1e-3))
    if T <= 0 or dt <= 0:
        raise ScenarioError("integrate: need T > 0 and dt > 0")

    integrals = None
    count = 0
    if "solution" in table:
        sol_name = table["solution"]
        solutions = SOLUTION_REGISTRY.get(sys.name.removesuffix("-fd"), {})
        if sol_name not in solutions:
            raise ScenarioError(f"unknown complete solution {sol_name!r}")
        obs = first_integrals(solutions[sol_name]())
        integrals = [lambda x, y, f=f: f(x, y) for f in obs]
        count = len(obs)

    traj = integrate(sys, ConstrainedState(x=x0, y=y0), T, dt,
                     first_integrals=integrals)
    if traj.error:
        raise NumericDomainError(f"integration aborted: {traj.error}")

    tol = float(table.get("energy_tolerance", table.get("tolerance", 1e-8)))
    report.check("energy drift", float(np.max(np.abs(traj.energy - traj.energy[0]))), tol)
    csv_name = data.get("output", {}).get("trajectory_csv", "trajectory.csv")
    write_trajectory_csv(out_dir / csv_name, sys, traj, count)
    report.info("trajectory csv", csv_name)


def _task_verify_section(sys, data, out_dir, report):
    table = data.get("verify_section", {})
    sec = _build_section(sys, table)
    expect = table.get("expect", "general")
    if expect not in ("general", "restricted"):
        raise ScenarioError(f"verify_section: unknown expectation {expect!r}")
    tol = float(table.get("tolerance", DEFAULT_TOLERANCE))
    points = _grid_points(table, sys.n)

    general = max(float(np.max(np.abs(general_hj_residual(sys, sec, x)))) for x in points)
    restricted = max(float(np.max(np.abs(restricted_hj_residual(sys, sec, x)))) for x in points)
    denergy = max(float(np.max(np.abs(denergy_annihilator_residual(sys, sec, x)))) for x in points)
    pullbacks = np.array([energy_pullback(sys, sec, x) for x in points])

    report.check("general residual", general, tol)
    if expect == "restricted":
        report.check("restricted residual", restricted, tol)
        report.check("denergy residual", denergy, tol)
        report.check("energy pullback variance", float(np.var(pullbacks)), 1e-12)
    else:
        report.info("restricted residual", _fmt(restricted))
        report.info("denergy residual", _fmt(denergy))


def _task_verify_complete(sys, data, out_dir, report):
    table = data.get("verify_complete", {})
    sol_name = table.get("solution")
    solutions = SOLUTION_REGISTRY.get(sys.name.removesuffix("-fd"), {})
    if sol_name not in solutions:
        raise ScenarioError(f"unknown complete solution {sol_name!r} for {sys.name!r}")
    cs = solutions[sol_name]()
    tol = float(table.get("tolerance", 1e-8))
    points = _grid_points(table, sys.n)
    lams = [np.asarray(l, dtype=float)
            for l in table.get("lambdas", [[1.0, 1.0], [1.0, 2.0], [-1.0, 1.0], [2.0, 0.5]])]

    report.check("round-trip defect",
                 check_round_trip(cs, points[:9], lams), 1e-8)
    report.info("min |det dsigma/dlambda|",
                _fmt(check_local_diffeomorphism(cs, points[:9], lams)))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        flavor = verify_flavor(sys, cs, points, lams, tol=tol)
    status = "PASS" if flavor == cs.flavor else "FAIL"
    report.lines.append(f"{status}: {cs.flavor}: verified flavor {flavor}")

    integrals = first_integrals(cs)
    x0 = _vector(table, "x0", sys.n, "verify_complete") if "x0" in table \
        else np.array([0.0, 1.0, 0.0])[: sys.n]
    lam0 = lams[0]
    s0 = ConstrainedState(x=x0, y=cs.section(lam0)(x0))
    T = float(table.get("T", 5.0))
    dt = float(table.get("dt", 1e-3))
    drift = conservation_check(sys, cs, s0, T, dt, integrals=integrals)
    report.check("conservation drift", float(np.max(drift)), tol)

    states = [ConstrainedState(x=x, y=cs.section(lam)(x))
              for x in points[:: max(1, len(points) // 25)] for lam in lams[:2]]
    report.info("transversality min |det|", _fmt(transversality_defect(sys, integrals, states)))
    if flavor == "restricted":
        report.check("involution",
                     involution_check(sys, cs, states, integrals=integrals,
                                      flavor_grid=points, flavor_lams=lams), tol)
    else:
        report.info("involution (advisory)",
                    _fmt(involution_check(sys, cs, states, integrals=integrals,
                                          advisory=True)))


def geometry_report(sys, points) -> str:
    """Per-point regularity, constrained-Hessian spectrum, bracket rank and coefficient summary."""
    lines = [f"geometry report: {sys.name} ({len(points)} points)"]
    regular = 0
    ranks = []
    max_ct = 0.0
    max_cg = 0.0
    y0 = np.zeros(sys.r)
    for x in points:
        try:
            verdict, smallest = sys.quasi.regularity_check(x, y0)
            rank = bracket_generating_rank(sys.frame, x, 2)
            coeffs = structure_coefficients(sys.frame, x)
        except NonholoError as exc:
            lines.append(f"  x={np.array2string(np.asarray(x), precision=3)}: ERROR {exc}")
            continue
        ct = float(np.max(np.abs(coeffs.transversal))) if coeffs.transversal.size else 0.0
        cg = float(np.max(np.abs(coeffs.constrained))) if coeffs.constrained.size else 0.0
        max_ct = max(max_ct, ct)
        max_cg = max(max_cg, cg)
        ranks.append(rank)
        if verdict == "regular":
            regular += 1
        lines.append(f"  x={np.array2string(np.asarray(x), precision=3)}: {verdict} "
                     f"(min eig {smallest:.6g}), bracket rank {rank}, "
                     f"max |C^A| {ct:.3g}, max |C^gamma| {cg:.3g}")
    lines.append(f"summary: {'regular everywhere' if regular == len(ranks) and ranks else 'degenerate points present'}")
    if ranks:
        if min(ranks) == max(ranks):
            lines.append(f"summary: bracket-generating rank {ranks[0]} everywhere at depth 2")
        else:
            lines.append(f"summary: bracket rank in [{min(ranks)}, {max(ranks)}] at depth 2")
    lines.append(f"summary: max |C^A| = {max_ct:.3g}"
                 + (" (holonomic: C^A == 0)" if max_ct == 0.0 else " (nonholonomic)"))
    return "\n".join(lines) + "\n"


def _task_geometry(sys, data, out_dir, report):
    table = data.get("geometry", {})
    points = _grid_points(table, sys.n)
    text = geometry_report(sys, points)
    name = data.get("output", {}).get("geometry_report", "geometry.txt")
    (out_dir / name).write_text(text)
    report.info("geometry report", name)


_TASK_RUNNERS = {
    "integrate": _task_integrate,
    "verify-section": _task_verify_section,
    "verify-complete": _task_verify_complete,
    "geometry": _task_geometry,
}


def run_scenario(path, out_dir=None, tolerance=None, seed=None) -> int:
    """Execute a scenario file; returns the exit status and writes artifacts.

    ``tolerance`` overrides the task's tolerance field; ``seed`` seeds any
    randomized verification grid (default grids are deterministic lattices).
    """
    try:
        data = load_scenario(path)
        sys_def = build_system(data)
    except ScenarioError as exc:
        print(f"input error: {exc}")
        return EXIT_INPUT
    if tolerance is not None:
        for key in ("integrate", "verify_section", "verify_complete"):
            if key in data:
                data[key]["tolerance"] = float(tolerance)
    if seed is not None:
        data["scenario"]["seed"] = int(seed)

    out = Path(out_dir) if out_dir is not None else Path(path).parent
    out.mkdir(parents=True, exist_ok=True)
    report = Report()
    try:
        _TASK_RUNNERS[data["scenario"]["task"]](sys_def, data, out, report)
    except ScenarioError as exc:
        print(f"input error: {exc}")
        return EXIT_INPUT
    except (NumericDomainError, RegularityError, FrameDegenerateError,
            InvalidCompleteSolutionError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}")
        return EXIT_NUMERIC

    report_name = data.get("output", {}).get("report", "report.txt")
    (out / report_name).write_text(report.text())
    print(report.text(), end="")
    return EXIT_PASS if report.passed else EXIT_TOLERANCE
