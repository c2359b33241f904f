"""End-to-end acceptance checks for the constrained free particle.

Each test prints one PASS/FAIL line with the measured value so a plain
`pytest -v -s tests/test_acceptance.py` doubles as a certification run.
"""

import numpy as np
import pytest

from nonholo import (CompleteSolution, ConstrainedState, integrate,
                     lie_bracket, make_free_particle, make_general_solution,
                     make_restricted_solution, omega_LD, sode_accel,
                     sode_accel_symplectic, denergy_annihilator_residual,
                     energy_pullback, first_integrals, general_hj_residual,
                     involution_check, nonholonomic_bracket,
                     restricted_hj_residual, transversality_defect,
                     verify_solution_by_flow)
from nonholo.cli import main
from nonholo.complete_solutions import (check_local_diffeomorphism,
                                        check_round_trip)
from nonholo.scenarios import (EXIT_INPUT, EXIT_PASS, EXIT_TOLERANCE,
                               geometry_report, run_scenario)
from nonholo.systems import make_holonomic_plane

from conftest import closed_form_accel, closed_form_flow, lattice


def report(criterion, ok, value):
    print(f"{'PASS' if ok else 'FAIL'}: {criterion}: {value:.3e}")
    assert ok, f"{criterion}: {value:.3e}"


def random_states(count, seed):
    rng = np.random.default_rng(seed)
    return [ConstrainedState(x=rng.uniform(-2, 2, 3), y=rng.uniform(-2, 2, 2))
            for _ in range(count)]


def expected_omega(s):
    m = np.zeros((4, 4))
    m[0, 1] = s.x[1] * s.y[0]
    m[0, 2] = 1.0 + s.x[1] ** 2
    m[1, 3] = 1.0
    return m - m.T


GRID9 = lattice((-1.0, 1.0), 9, 3)
LAMS4 = [np.array(l) for l in [(1.0, 1.0), (1.0, 2.0), (-1.0, 1.0), (2.0, 0.5)]]


def test_criterion_01_two_form_components(free_particle, free_particle_fd):
    worst = 0.0
    for s in random_states(1000, seed=101):
        worst = max(worst, float(np.max(np.abs(
            omega_LD(free_particle, s).matrix - expected_omega(s)))))
    report("two-form components (analytic)", worst < 1e-10, worst)
    worst_fd = 0.0
    for s in random_states(1000, seed=102):
        worst_fd = max(worst_fd, float(np.max(np.abs(
            omega_LD(free_particle_fd, s).matrix - expected_omega(s)))))
    report("two-form components (finite differences)", worst_fd < 1e-6, worst_fd)


def test_criterion_02_accelerations(free_particle):
    worst = 0.0
    worst_sym = 0.0
    for s in random_states(1000, seed=103):
        f = sode_accel(free_particle, s)
        worst = max(worst, float(np.max(np.abs(f - closed_form_accel(s.x, s.y)))))
        worst_sym = max(worst_sym, float(np.max(np.abs(
            sode_accel_symplectic(free_particle, s) - f))))
    report("accelerations vs closed form", worst < 1e-10, worst)
    report("two-form route agrees with direct solve", worst_sym < 1e-8, worst_sym)


def test_criterion_03_flow_match_and_order(free_particle):
    s0 = ConstrainedState(x=np.zeros(3), y=np.array([1.0, 1.0]))
    expected = closed_form_flow(np.zeros(3), [1.0, 1.0], 2.0)
    traj = integrate(free_particle, s0, 2.0, 1e-3)
    err = float(np.max(np.abs(traj.states[-1].x - expected)))
    report("trajectory endpoint vs closed-form flow", err < 1e-6, err)

    # step-halving at a coarse dt where truncation dominates roundoff
    def endpoint_error(dt):
        t = integrate(free_particle, s0, 2.0, dt)
        return float(np.max(np.abs(t.states[-1].x - expected)))

    ratio = endpoint_error(0.1) / endpoint_error(0.05)
    report("fourth-order error ratio under step halving",
           12.0 <= ratio <= 20.0, ratio)


def test_criterion_04_restricted_solution_certified(free_particle):
    cs = make_restricted_solution()
    worst_res = 0.0
    worst_den = 0.0
    variance = 0.0
    for lam in LAMS4:
        sec = cs.section(lam)
        pullbacks = []
        for x in GRID9:
            worst_res = max(worst_res, float(np.max(np.abs(
                restricted_hj_residual(free_particle, sec, x)))))
            worst_den = max(worst_den, float(np.max(np.abs(
                denergy_annihilator_residual(free_particle, sec, x)))))
            pullbacks.append(energy_pullback(free_particle, sec, x))
        variance = max(variance, float(np.var(pullbacks)))
    report("restricted family two-form residual", worst_res < 1e-8, worst_res)
    report("restricted family energy-differential residual",
           worst_den < 1e-8, worst_den)
    report("restricted family energy pullback variance",
           variance < 1e-12, variance)


def test_criterion_05_general_but_not_restricted(free_particle):
    cs = make_general_solution()
    worst_gap = 0.0
    worst_gen = 0.0
    for lam in LAMS4:
        sec = cs.section(lam)
        for x in GRID9:
            M = restricted_hj_residual(free_particle, sec, x)
            expected = -x[1] * (lam[1] * x[2] - lam[0]) / (1.0 + x[1] ** 2)
            worst_gap = max(worst_gap, abs(M[0, 1] - expected))
            worst_gen = max(worst_gen, float(np.max(np.abs(
                general_hj_residual(free_particle, sec, x)))))
    report("off-diagonal residual matches closed form", worst_gap < 1e-8, worst_gap)
    report("general residual of the non-restricted family",
           worst_gen < 1e-8, worst_gen)


def test_criterion_06_constants_of_motion(free_particle):
    s0 = ConstrainedState(x=np.array([0.0, 0.5, 0.0]), y=np.array([1.0, 1.0]))
    worst = {}
    for name, cs in (("restricted", make_restricted_solution()),
                     ("general", make_general_solution())):
        fi = first_integrals(cs)
        traj = integrate(free_particle, s0, 5.0, 1e-3,
                         first_integrals=[lambda x, y, f=f: f(x, y) for f in fi])
        assert traj.error is None
        worst[name] = float(np.max(np.abs(
            traj.first_integrals - traj.first_integrals[0])))
    report("integral drift, restricted family", worst["restricted"] < 1e-8,
           worst["restricted"])
    report("integral drift, general family", worst["general"] < 1e-8,
           worst["general"])


def test_criterion_07_involution(free_particle):
    cs = make_restricted_solution()
    y_fixed = np.array([0.8, -0.6])
    states = [ConstrainedState(x=x, y=y_fixed) for x in lattice((-1.0, 1.0), 5, 3)]
    worst = involution_check(free_particle, cs, states,
                             integrals=first_integrals(cs),
                             flavor_grid=GRID9[:27], flavor_lams=LAMS4)
    report("integrals in involution", worst < 1e-8, worst)


def test_criterion_08_energy_conservation(free_particle):
    worst = 0.0
    for x0, y0, T in (((0.0, 0.0, 0.0), (1.0, 1.0), 2.0),
                      ((0.0, 0.5, 0.0), (1.0, 1.0), 5.0),
                      ((0.2, -0.3, 0.5), (2.0, 0.5), 5.0)):
        traj = integrate(free_particle,
                         ConstrainedState(x=np.array(x0), y=np.array(y0)), T, 1e-3)
        assert traj.error is None
        worst = max(worst, float(np.max(np.abs(traj.energy - traj.energy[0]))))
    report("energy drift along acceptance trajectories", worst < 1e-8, worst)


def test_criterion_09_geometry_reports(free_particle):
    pts = [np.array(p) for p in lattice((-1.0, 1.0), 5, 3)]
    text = geometry_report(free_particle, pts)
    ok = ("regular everywhere" in text
          and "bracket-generating rank 3 everywhere at depth 2" in text
          and "(nonholonomic)" in text)
    # min eigenvalue of the constrained Hessian is min(1, 1 + x2^2) = 1
    smallest = min(free_particle.quasi.regularity_check(x, np.zeros(2))[1]
                   for x in pts)
    ok = ok and abs(smallest - 1.0) < 1e-10
    holo = geometry_report(make_holonomic_plane(),
                           [np.array(p) for p in lattice((-1.0, 1.0), 3, 3)])
    ok = ok and "(holonomic: C^A == 0)" in holo
    report("geometry reports (regularity, rank, flat coefficients)",
           ok, smallest)


def test_criterion_10_property_suite(free_particle, free_particle_fd):
    ok = True
    worst = 0.0

    for s in random_states(200, seed=107):
        om = omega_LD(free_particle, s).matrix
        ok = ok and np.max(np.abs(om + om.T)) == 0.0
        worst = max(worst, float(np.max(np.abs(
            sode_accel_symplectic(free_particle, s) - sode_accel(free_particle, s)))))
    ok = ok and worst < 1e-8

    frame = free_particle.frame
    rng = np.random.default_rng(109)
    for _ in range(20):
        x = rng.uniform(-2, 2, 3)
        ok = ok and np.max(np.abs(lie_bracket(frame, 0, 1, x)
                                  + lie_bracket(frame, 1, 0, x))) < 1e-10
        y = rng.uniform(-2, 2, 2)
        ok = ok and np.max(np.abs(
            free_particle_fd.quasi.grad_y(x, y)
            - free_particle.quasi.grad_y(x, y))) < 1e-6
        ok = ok and np.max(np.abs(
            free_particle_fd.quasi.hessian_GLD(x, y)
            - free_particle.quasi.hessian_GLD(x, y))) < 1e-6

    points = [np.array(p) for p in lattice((-1.0, 1.0), 3, 3)]
    for cs in (make_restricted_solution(), make_general_solution()):
        ok = ok and check_round_trip(cs, points, LAMS4) < 1e-8
        ok = ok and check_local_diffeomorphism(cs, points, LAMS4) > 1e-3
        states = [ConstrainedState(x=x, y=cs.section(LAMS4[0])(x))
                  for x in points[::3]]
        ok = ok and transversality_defect(
            free_particle, first_integrals(cs), states) > 1e-3

    sec = make_restricted_solution().section([1.0, 1.0])
    good = verify_solution_by_flow(free_particle, sec, np.zeros(3), 2.0, 1e-3)
    bad_sec = make_general_solution().section([0.0, 0.0])
    const = CompleteSolution(family=lambda x, lam: np.asarray(lam, dtype=float),
                             inverse=lambda x, y: np.asarray(y, dtype=float))
    bad = verify_solution_by_flow(free_particle, const.section([1.0, 1.0]),
                                  np.zeros(3), 2.0, 1e-3)
    ok = ok and good < 1e-6 and bad > 1e-2
    report("property suite (antisymmetry, cross checks, invariants)",
           ok, max(worst, good))


def test_criterion_11_cli_determinism_and_exit_codes(tmp_path):
    scenario = tmp_path / "run.toml"
    scenario.write_text("""
[scenario]
task = "integrate"
system = "free-particle-nonholonomic"

[integrate]
x0 = [0.0, 0.0, 0.0]
y0 = [1.0, 1.0]
T = 1.0
dt = 0.001
""")
    out1, out2 = tmp_path / "a", tmp_path / "b"
    ok = main(["run", str(scenario), "--out", str(out1)]) == EXIT_PASS
    ok = ok and main(["run", str(scenario), "--out", str(out2)]) == EXIT_PASS
    ok = ok and ((out1 / "trajectory.csv").read_bytes()
                 == (out2 / "trajectory.csv").read_bytes())

    failing = tmp_path / "fail.toml"
    failing.write_text(scenario.read_text().replace(
        'dt = 0.001', 'dt = 0.001\nenergy_tolerance = 1e-30'))
    ok = ok and run_scenario(failing, out_dir=tmp_path / "f") == EXIT_TOLERANCE

    malformed = tmp_path / "bad.toml"
    malformed.write_text('[scenario]\ntask = "integrate"\nsystem = "nope"\n')
    ok = ok and run_scenario(malformed, out_dir=tmp_path / "m") == EXIT_INPUT
    report("scenario runs deterministic with exit-status contract",
           ok, float(ok))
