"""Constrained second-order dynamics.

The equations of motion are assembled two independent ways: directly from
the force-balance in quasivelocities, and through the constrained
two-form / energy-differential pair.  A fixed-step classical Runge-Kutta
integrator produces trajectories in the adapted (x, y) coordinates, so
the constraint holds identically along the flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .differentiation import require_finite
from .errors import NumericDomainError, RegularityError
from .frames import structure_coefficients
from .lagrangian import SystemDefinition


@dataclass(frozen=True)
class ConstrainedState:
    """A point (x, y) of the constraint submanifold in adapted coordinates."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", require_finite(self.x, "in state x"))
        object.__setattr__(self, "y", require_finite(self.y, "in state y"))


@dataclass(frozen=True)
class OmegaLD:
    """The constrained two-form at a state, in the ordered basis (X_1..X_r, V_1..V_r).

    ``matrix`` is 2r x 2r and exactly antisymmetric; the V-V block is zero
    and the X-V block is the constrained Hessian.
    """

    matrix: np.ndarray
    state: ConstrainedState


@dataclass
class Trajectory:
    """Time-ordered samples of a constrained motion with diagnostics."""

    times: np.ndarray
    states: List[ConstrainedState]
    energy: np.ndarray
    first_integrals: Optional[np.ndarray] = None
    error: Optional[str] = None

    def positions(self):
        return np.array([s.x for s in self.states])

    def velocities(self):
        return np.array([s.y for s in self.states])


def omega_LD(sys: SystemDefinition, s: ConstrainedState) -> OmegaLD:
    """Assemble the constrained two-form matrix at a state."""
    r = sys.r
    ql = sys.quasi
    E = sys.frame.matrix(s.x)
    rho = E[:, :r]
    coeffs = structure_coefficients(sys.frame, s.x)
    gy = ql.grad_y(s.x, s.y)
    G = ql.hessian_GLD(s.x, s.y)
    M = ql.hess_yx(s.x, s.y)[:r, :]

    W = M @ rho  # W[a, b] = rho_b^i d^2 Lq / d y_a d x_i
    cterm = np.einsum("g,abg->ab", gy[:r], coeffs.constrained) \
        + np.einsum("A,abA->ab", gy[r:], coeffs.transversal)
    xx = (W - W.T) + 0.5 * (cterm - cterm.T)

    Om = np.zeros((2 * r, 2 * r))
    Om[:r, :r] = xx
    Om[:r, r:] = G
    Om[r:, :r] = -G.T
    return OmegaLD(matrix=Om, state=s)


def _force_rhs(sys: SystemDefinition, s: ConstrainedState):
    """Right-hand side of the force balance G f = rhs, plus G itself."""
    r = sys.r
    ql = sys.quasi
    rho = sys.frame.matrix(s.x)[:, :r]
    coeffs = structure_coefficients(sys.frame, s.x)
    gx = ql.grad_x(s.x, s.y)
    gy = ql.grad_y(s.x, s.y)
    G = ql.hessian_GLD(s.x, s.y)
    M = ql.hess_yx(s.x, s.y)[:r, :]
    xdot = rho @ s.y
    rhs = rho.T @ gx - M @ xdot \
        - np.einsum("g,abg,b->a", gy[:r], coeffs.constrained, s.y) \
        - np.einsum("A,abA,b->a", gy[r:], coeffs.transversal, s.y)
    return G, rhs


def sode_accel(sys: SystemDefinition, s: ConstrainedState) -> np.ndarray:
    """Quasivelocity accelerations from the force balance in the moving frame."""
    verdict, smallest = sys.quasi.regularity_check(s.x, s.y)
    if verdict != "regular":
        raise RegularityError(f"degenerate constrained Hessian (min singular value {smallest:.3e})")
    G, rhs = _force_rhs(sys, s)
    try:
        f = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericDomainError("singular solve in sode_accel") from exc
    return require_finite(f, "in sode_accel")


def energy_differential(sys: SystemDefinition, s: ConstrainedState) -> np.ndarray:
    """Components of the restricted energy differential in the (X, V) basis."""
    r = sys.r
    ql = sys.quasi
    rho = sys.frame.matrix(s.x)[:, :r]
    gx = ql.grad_x(s.x, s.y)
    G = ql.hessian_GLD(s.x, s.y)
    M = ql.hess_yx(s.x, s.y)[:r, :]
    # dE/dx_j = y_a M[a, j] - dLq/dx_j at fixed quasivelocities; dE/dy = G y
    eps_x = rho.T @ (M.T @ s.y - gx)
    eps_v = G @ s.y
    return np.concatenate([eps_x, eps_v])


def sode_accel_symplectic(sys: SystemDefinition, s: ConstrainedState) -> np.ndarray:
    """Accelerations recovered by contracting the two-form against the energy differential.

    Independent cross-check of :func:`sode_accel`: writes the dynamics
    vector as (y, f) in the (X, V) basis and solves the (overdetermined)
    contraction equations for f in the least-squares sense.
    """
    verdict, smallest = sys.quasi.regularity_check(s.x, s.y)
    if verdict != "regular":
        raise RegularityError(f"degenerate constrained Hessian (min singular value {smallest:.3e})")
    r = sys.r
    Om = omega_LD(sys, s).matrix
    eps = energy_differential(sys, s)
    A = Om.T[:, r:]
    b = eps - Om.T[:, :r] @ s.y
    f, *_ = np.linalg.lstsq(A, b, rcond=None)
    return require_finite(f, "in sode_accel_symplectic")


def sode_rhs(sys: SystemDefinition, s: ConstrainedState):
    """Time derivatives (xdot, ydot) of the constrained motion at a state."""
    rho = sys.frame.matrix(s.x)[:, : sys.r]
    return rho @ s.y, sode_accel(sys, s)


def _rk4_step(rhs, z, dt):
    k1 = rhs(z)
    k2 = rhs(z + 0.5 * dt * k1)
    k3 = rhs(z + 0.5 * dt * k2)
    k4 = rhs(z + dt * k3)
    return z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(sys: SystemDefinition, s0: ConstrainedState, T: float, dt: float,
              first_integrals=None) -> Trajectory:
    """Classical fixed-step RK4 on the constrained equations of motion.

    The final step is shortened so the trajectory lands on T exactly.  On
    loss of regularity (or a numerical failure) the partial trajectory is
    returned with ``error`` set.
    """
    if T < 0 or dt <= 0:
        raise ValueError("need T >= 0 and dt > 0")
    n, r = sys.n, sys.r

    def rhs(z):
        s = ConstrainedState(x=z[:n], y=z[n:])
        xdot, ydot = sode_rhs(sys, s)
        return np.concatenate([xdot, ydot])

    z = np.concatenate([np.asarray(s0.x, dtype=float), np.asarray(s0.y, dtype=float)])
    t = 0.0
    times = [0.0]
    states = [ConstrainedState(x=z[:n].copy(), y=z[n:].copy())]
    error = None
    while t < T - 1e-15 * max(1.0, T):
        step = min(dt, T - t)
        try:
            z = _rk4_step(rhs, z, step)
        except (RegularityError, NumericDomainError) as exc:
            error = str(exc)
            break
        t += step
        times.append(t)
        states.append(ConstrainedState(x=z[:n].copy(), y=z[n:].copy()))

    energy = np.array([sys.quasi.energy(s.x, s.y) for s in states])
    fi = None
    if first_integrals:
        fi = np.array([[f(s.x, s.y) for f in first_integrals] for s in states])
    return Trajectory(times=np.array(times), states=states, energy=energy,
                      first_integrals=fi, error=error)
