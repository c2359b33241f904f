"""Parametric families of solutions, their first integrals, and the nonholonomic bracket.

A complete solution is an r-parameter family of sections whose joint map
(x, lam) -> (x, sigma_lam(x)) is a local diffeomorphism onto the
constraint set.  Inverting it fibrewise yields r first integrals; for
families solving the restricted problem these integrals are pairwise in
involution with respect to the nonholonomic bracket.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .differentiation import FD_STEP, fd_gradient, fd_jacobian, require_finite
from .dynamics import ConstrainedState, integrate, omega_LD
from .errors import InvalidCompleteSolutionError, RegularityError
from .hamilton_jacobi import (Section, denergy_annihilator_residual,
                              restricted_hj_residual)
from .lagrangian import SystemDefinition

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
ROUND_TRIP_TOL = 1e-8


@dataclass(frozen=True)
class ObservableOnD:
    """A scalar function of the constrained state, with optional analytic gradients."""

    value: Callable[[np.ndarray, np.ndarray], float]
    grad_x: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    grad_y: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    fd_step: float = FD_STEP

    def __call__(self, x, y):
        return float(self.value(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))

    def gx(self, x, y):
        if self.grad_x is not None:
            return require_finite(self.grad_x(x, y), "in observable grad_x")
        return fd_gradient(lambda z: self.value(z, y), np.asarray(x, dtype=float), self.fd_step)

    def gy(self, x, y):
        if self.grad_y is not None:
            return require_finite(self.grad_y(x, y), "in observable grad_y")
        return fd_gradient(lambda w: self.value(x, w), np.asarray(y, dtype=float), self.fd_step)


@dataclass
class CompleteSolution:
    """Family sigma_lam(x) with (possibly numeric) fibrewise inverse.

    ``family(x, lam)`` returns the r quasivelocity components;
    ``inverse(x, y)``, when omitted, is solved by damped Newton iteration.
    ``flavor`` is the user's claim ("general" or "restricted") and is
    re-verified before any involution assertion.
    """

    family: Callable[[np.ndarray, np.ndarray], np.ndarray]
    flavor: str = "general"
    inverse: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    family_jac_x: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    family_jac_lam: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    integral_observables: Optional[List[ObservableOnD]] = None
    name: str = ""
    fd_step: float = FD_STEP

    def __post_init__(self):
        if self.flavor not in ("general", "restricted"):
            raise ValueError(f"unknown flavor {self.flavor!r}")

    def section(self, lam) -> Section:
        lam = np.asarray(lam, dtype=float)
        jac = None
        if self.family_jac_x is not None:
            jac = lambda x: self.family_jac_x(x, lam)
        return Section(sigma=lambda x: self.family(x, lam), jacobian=jac,
                       fd_step=self.fd_step)

    def lam_jacobian(self, x, lam):
        if self.family_jac_lam is not None:
            return require_finite(self.family_jac_lam(x, lam), "in family lambda-jacobian")
        return fd_jacobian(lambda l: np.asarray(self.family(x, l), dtype=float),
                           np.asarray(lam, dtype=float), self.fd_step)

    def invert(self, x, y) -> np.ndarray:
        """Parameters lam with family(x, lam) = y, closed form or damped Newton."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.inverse is not None:
            return require_finite(self.inverse(x, y), "in inverse")
        lam = np.zeros_like(y)
        for _ in range(NEWTON_MAX_ITER):
            res = np.asarray(self.family(x, lam), dtype=float) - y
            if np.max(np.abs(res)) < NEWTON_TOL:
                return lam
            J = self.lam_jacobian(x, lam)
            try:
                step = np.linalg.solve(J, res)
            except np.linalg.LinAlgError as exc:
                raise InvalidCompleteSolutionError(
                    "singular lambda-Jacobian during Newton inversion") from exc
            # damped update: halve until the residual decreases
            alpha = 1.0
            base = np.max(np.abs(res))
            for _ in range(30):
                trial = lam - alpha * step
                if np.max(np.abs(np.asarray(self.family(x, trial), dtype=float) - y)) < base:
                    lam = trial
                    break
                alpha *= 0.5
            else:
                raise InvalidCompleteSolutionError("Newton inversion stalled")
        raise InvalidCompleteSolutionError("Newton inversion did not converge")


def check_round_trip(cs: CompleteSolution, points: Sequence, lams: Sequence,
                     tol: float = ROUND_TRIP_TOL) -> float:
    """Max |invert(x, family(x, lam)) - lam| over the given samples."""
    worst = 0.0
    for x in points:
        for lam in lams:
            lam = np.asarray(lam, dtype=float)
            y = np.asarray(cs.family(np.asarray(x, dtype=float), lam), dtype=float)
            worst = max(worst, float(np.max(np.abs(cs.invert(x, y) - lam))))
    if worst > tol:
        raise InvalidCompleteSolutionError(
            f"round-trip defect {worst:.3e} exceeds {tol:.1e}")
    return worst


def check_local_diffeomorphism(cs: CompleteSolution, points: Sequence, lams: Sequence) -> float:
    """Smallest |det| of the lambda-Jacobian over the samples; zero means failure."""
    worst = np.inf
    for x in points:
        for lam in lams:
            d = abs(float(np.linalg.det(cs.lam_jacobian(np.asarray(x, dtype=float),
                                                        np.asarray(lam, dtype=float)))))
            worst = min(worst, d)
    if worst == 0.0:
        raise InvalidCompleteSolutionError("lambda-Jacobian singular at a sample point")
    return worst


def _default_samples(n, r):
    pts = [np.full(n, v) for v in (-0.5, 0.0, 0.5)]
    lams = [np.full(r, v) for v in (-1.0, 0.5, 1.0)]
    return pts, lams


def first_integrals(cs: CompleteSolution, sample_points=None, sample_lams=None
                    ) -> List[ObservableOnD]:
    """The r components of the fibrewise inverse, as observables on the constraint set.

    The round-trip and local-diffeomorphism invariants are validated on
    the supplied samples before the integrals are handed out.
    """
    if sample_points is not None and sample_lams is not None:
        check_round_trip(cs, sample_points, sample_lams)
        check_local_diffeomorphism(cs, sample_points, sample_lams)
    if cs.integral_observables is not None:
        return list(cs.integral_observables)
    if sample_lams is None:
        raise ValueError("cannot infer the number of integrals; pass sample_lams")
    r = np.asarray(sample_lams[0]).size

    def component(i):
        return ObservableOnD(value=lambda x, y, i=i: float(cs.invert(x, y)[i]),
                             fd_step=cs.fd_step)

    return [component(i) for i in range(r)]


def conservation_check(sys: SystemDefinition, cs: CompleteSolution,
                       s0: ConstrainedState, T: float, dt: float,
                       integrals: Optional[List[ObservableOnD]] = None) -> np.ndarray:
    """Max drift of each first integral along the integrated trajectory from s0."""
    if integrals is None:
        integrals = first_integrals(cs, sample_points=[s0.x],
                                    sample_lams=[cs.invert(s0.x, s0.y)])
    traj = integrate(sys, s0, T, dt,
                     first_integrals=[lambda x, y, f=f: f(x, y) for f in integrals])
    if traj.error:
        raise RuntimeError(f"integration failed: {traj.error}")
    values = traj.first_integrals
    return np.max(np.abs(values - values[0]), axis=0)


def hamiltonian_section(sys: SystemDefinition, g: ObservableOnD,
                        s: ConstrainedState) -> np.ndarray:
    """Coefficients in the (X, V) basis of the vector field generated by g through the two-form."""
    r = sys.r
    Om = omega_LD(sys, s).matrix
    rho = sys.frame.matrix(s.x)[:, :r]
    dg = np.concatenate([rho.T @ g.gx(s.x, s.y), g.gy(s.x, s.y)])
    try:
        eta = np.linalg.solve(Om.T, dg)
    except np.linalg.LinAlgError as exc:
        raise RegularityError("constrained two-form singular at state") from exc
    return require_finite(eta, "in hamiltonian_section")


def nonholonomic_bracket(sys: SystemDefinition, f: ObservableOnD, g: ObservableOnD,
                         s: ConstrainedState) -> float:
    """Antisymmetric bracket of two observables through the constrained two-form."""
    Om = omega_LD(sys, s).matrix
    eta_f = hamiltonian_section(sys, f, s)
    eta_g = hamiltonian_section(sys, g, s)
    return float(eta_f @ Om @ eta_g)


def verify_flavor(sys: SystemDefinition, cs: CompleteSolution, grid_points,
                  lams, tol: float = 1e-8) -> str:
    """Machine-check the claimed flavor; downgrade to "general" with a warning on failure."""
    if cs.flavor != "restricted":
        return cs.flavor
    worst = 0.0
    for lam in lams:
        sec = cs.section(lam)
        for x in grid_points:
            worst = max(worst,
                        float(np.max(np.abs(restricted_hj_residual(sys, sec, x)))),
                        float(np.max(np.abs(denergy_annihilator_residual(sys, sec, x)))))
    if worst > tol:
        warnings.warn(f"claimed restricted solution has residual {worst:.3e} > {tol:.1e}; "
                      "downgrading to general", stacklevel=2)
        return "general"
    return "restricted"


def involution_check(sys: SystemDefinition, cs: CompleteSolution, grid_states,
                     integrals: Optional[List[ObservableOnD]] = None,
                     advisory: bool = False, flavor_grid=None, flavor_lams=None) -> float:
    """Max |bracket| over all integral pairs and grid states.

    Requires a (verified) restricted solution unless ``advisory`` is set,
    in which case the value is reported without any claim attached.
    """
    if not advisory:
        grid = flavor_grid if flavor_grid is not None else [s.x for s in grid_states[:5]]
        lams = flavor_lams if flavor_lams is not None else _default_samples(sys.n, sys.r)[1]
        if verify_flavor(sys, cs, grid, lams) != "restricted":
            raise InvalidCompleteSolutionError(
                "involution assertion requires a restricted complete solution "
                "(use advisory=True to report values only)")
    if integrals is None:
        integrals = first_integrals(cs, sample_points=[grid_states[0].x],
                                    sample_lams=[cs.invert(grid_states[0].x, grid_states[0].y)])
    worst = 0.0
    for s in grid_states:
        for f, g in itertools.combinations(integrals, 2):
            worst = max(worst, abs(nonholonomic_bracket(sys, f, g, s)))
    return worst


def transversality_defect(sys: SystemDefinition, integrals: List[ObservableOnD],
                          states) -> float:
    """Smallest |det| over states of the matrix of vertical derivatives of the integrals."""
    worst = np.inf
    for s in states:
        M = np.stack([f.gy(s.x, s.y) for f in integrals])
        worst = min(worst, abs(float(np.linalg.det(M))))
    return worst
