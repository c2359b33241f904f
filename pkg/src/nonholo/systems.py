"""Built-in systems and solution families.

The flagship example is a free particle in R^3 whose velocity along the
third axis is slaved to the first: xdot_3 = x_2 * xdot_1.  The adapted
frame makes that constraint read y_3 = 0.  Two closed-form solution
families are provided: one solving the restricted problem (constant
energy along the family), one solving only the general problem.
"""

from __future__ import annotations

import numpy as np

from .complete_solutions import CompleteSolution, ObservableOnD
from .frames import FrameField, frame_from_B
from .lagrangian import LagrangianDef, SystemDefinition


def _kinetic_lagrangian(n, analytic=True):
    """Pure kinetic Lagrangian 0.5 |v|^2 in natural velocities."""
    kwargs = {}
    if analytic:
        kwargs = dict(
            grad_x=lambda x, v: np.zeros(n),
            grad_v=lambda x, v: np.asarray(v, dtype=float),
            hess_vv=lambda x, v: np.eye(n),
            hess_vx=lambda x, v: np.zeros((n, n)),
        )
    return LagrangianDef(value=lambda x, v: 0.5 * float(np.dot(v, v)), **kwargs)


def make_free_particle(analytic: bool = True) -> SystemDefinition:
    """Free particle in R^3 with the constraint xdot_3 = x_2 xdot_1."""
    B = lambda x: np.array([[x[1], 0.0]])
    B_jac = None
    if analytic:
        def B_jac(x):
            dB = np.zeros((1, 2, 3))
            dB[0, 0, 1] = 1.0
            return dB
    frame = frame_from_B(3, 2, B, B_jacobian=B_jac)
    name = "free-particle-nonholonomic" if analytic else "free-particle-nonholonomic-fd"
    return SystemDefinition(name=name, frame=frame,
                            lagrangian=_kinetic_lagrangian(3, analytic))


def make_holonomic_plane(analytic: bool = True) -> SystemDefinition:
    """Free particle in R^3 confined (at the velocity level) to horizontal planes."""
    frame = frame_from_B(3, 2, lambda x: np.zeros((1, 2)),
                         B_jacobian=(lambda x: np.zeros((1, 2, 3))) if analytic else None)
    return SystemDefinition(name="holonomic-plane", frame=frame,
                            lagrangian=_kinetic_lagrangian(3, analytic))


def make_degenerate_line() -> SystemDefinition:
    """Degenerate example: the Lagrangian ignores the one admissible direction."""
    E = np.array([[0.0, 1.0], [1.0, 0.0]])
    frame = FrameField(n=2, r=1, basis=lambda x: E.copy(),
                       jacobian=lambda x: np.zeros((2, 2, 2)))
    lag = LagrangianDef(
        value=lambda x, v: 0.5 * float(v[0]) ** 2,
        grad_x=lambda x, v: np.zeros(2),
        grad_v=lambda x, v: np.array([v[0], 0.0]),
        hess_vv=lambda x, v: np.diag([1.0, 0.0]),
        hess_vx=lambda x, v: np.zeros((2, 2)),
    )
    return SystemDefinition(name="degenerate-line", frame=frame, lagrangian=lag)


def make_restricted_solution() -> CompleteSolution:
    """Complete solution of the restricted problem for the free particle.

    sigma_lam(x) = (lam_1 / sqrt(1 + x_2^2), lam_2); the inverse gives the
    first integrals f_1 = y_1 sqrt(1 + x_2^2) and f_2 = y_2.
    """

    def family(x, lam):
        return np.array([lam[0] / np.sqrt(1.0 + x[1] ** 2), lam[1]])

    def inverse(x, y):
        return np.array([y[0] * np.sqrt(1.0 + x[1] ** 2), y[1]])

    def jac_x(x, lam):
        J = np.zeros((2, 3))
        J[0, 1] = -lam[0] * x[1] * (1.0 + x[1] ** 2) ** -1.5
        return J

    def jac_lam(x, lam):
        return np.array([[1.0 / np.sqrt(1.0 + x[1] ** 2), 0.0], [0.0, 1.0]])

    integrals = [
        ObservableOnD(
            value=lambda x, y: y[0] * np.sqrt(1.0 + x[1] ** 2),
            grad_x=lambda x, y: np.array([0.0, y[0] * x[1] / np.sqrt(1.0 + x[1] ** 2), 0.0]),
            grad_y=lambda x, y: np.array([np.sqrt(1.0 + x[1] ** 2), 0.0]),
        ),
        ObservableOnD(
            value=lambda x, y: y[1],
            grad_x=lambda x, y: np.zeros(3),
            grad_y=lambda x, y: np.array([0.0, 1.0]),
        ),
    ]
    return CompleteSolution(family=family, inverse=inverse, flavor="restricted",
                            family_jac_x=jac_x, family_jac_lam=jac_lam,
                            integral_observables=integrals, name="restricted")


def make_general_solution() -> CompleteSolution:
    """Complete solution of the general (but not restricted) problem for the free particle.

    sigma_lam(x) = ((lam_2 x_3 - lam_1) / (1 + x_2^2), lam_2); the first
    integrals are f_1 = x_3 y_2 - y_1 (1 + x_2^2) and f_2 = y_2.
    """

    def family(x, lam):
        return np.array([(lam[1] * x[2] - lam[0]) / (1.0 + x[1] ** 2), lam[1]])

    def inverse(x, y):
        return np.array([x[2] * y[1] - y[0] * (1.0 + x[1] ** 2), y[1]])

    def jac_x(x, lam):
        d = 1.0 + x[1] ** 2
        J = np.zeros((2, 3))
        J[0, 1] = -2.0 * x[1] * (lam[1] * x[2] - lam[0]) / d ** 2
        J[0, 2] = lam[1] / d
        return J

    def jac_lam(x, lam):
        d = 1.0 + x[1] ** 2
        return np.array([[-1.0 / d, x[2] / d], [0.0, 1.0]])

    integrals = [
        ObservableOnD(
            value=lambda x, y: x[2] * y[1] - y[0] * (1.0 + x[1] ** 2),
            grad_x=lambda x, y: np.array([0.0, -2.0 * x[1] * y[0], y[1]]),
            grad_y=lambda x, y: np.array([-(1.0 + x[1] ** 2), x[2]]),
        ),
        ObservableOnD(
            value=lambda x, y: y[1],
            grad_x=lambda x, y: np.zeros(3),
            grad_y=lambda x, y: np.array([0.0, 1.0]),
        ),
    ]
    return CompleteSolution(family=family, inverse=inverse, flavor="general",
                            family_jac_x=jac_x, family_jac_lam=jac_lam,
                            integral_observables=integrals, name="general")


SYSTEM_REGISTRY = {
    "free-particle-nonholonomic": make_free_particle,
    "holonomic-plane": make_holonomic_plane,
    "degenerate-line": make_degenerate_line,
}

SOLUTION_REGISTRY = {
    "free-particle-nonholonomic": {
        "restricted": make_restricted_solution,
        "general": make_general_solution,
    },
}
