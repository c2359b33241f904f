"""Residual tests for candidate first-order solutions of the constrained dynamics.

A candidate is a section sigma: x -> R^r assigning admissible
quasivelocities to every configuration.  The general problem asks that
integral curves of the induced vector field lift to motions; the
restricted problem additionally requires the pulled-back two-form and the
differential of the pulled-back energy to vanish on admissible directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .differentiation import FD_STEP, fd_gradient, fd_jacobian, require_finite
from .dynamics import ConstrainedState, _rk4_step, integrate
from .frames import structure_coefficients
from .lagrangian import SystemDefinition


@dataclass(frozen=True)
class Section:
    """Quasivelocity section sigma(x) in R^r, with optional analytic Jacobian (r x n)."""

    sigma: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: float = FD_STEP

    def __call__(self, x):
        return require_finite(self.sigma(np.asarray(x, dtype=float)), "in section")

    def jac(self, x):
        x = np.asarray(x, dtype=float)
        if self.jacobian is not None:
            return require_finite(self.jacobian(x), "in section jacobian")
        return fd_jacobian(lambda z: np.asarray(self.sigma(z), dtype=float), x, self.fd_step)


def _section_data(sys: SystemDefinition, sec: Section, x):
    """Shared evaluations at (x, sigma(x), 0)."""
    x = np.asarray(x, dtype=float)
    r = sys.r
    ql = sys.quasi
    sig = sec(x)
    dsig = sec.jac(x)
    rho = sys.frame.matrix(x)[:, :r]
    coeffs = structure_coefficients(sys.frame, x)
    gy = ql.grad_y(x, sig)
    gx = ql.grad_x(x, sig)
    M = ql.hess_yx(x, sig)[:r, :]
    Gyy = ql.hess_yy(x, sig)
    # W[a, j] = d/dx_j of (dLq/dy_a evaluated on the section)
    W = M + Gyy[:r, :r] @ dsig
    return sig, dsig, rho, coeffs, gy, gx, W


def general_hj_residual(sys: SystemDefinition, sec: Section, x) -> np.ndarray:
    """Per-direction defect of the first-order equations for the general problem.

    Zero (up to tolerance) at every point iff the section solves the
    general problem there.
    """
    sig, _, rho, coeffs, gy, gx, W = _section_data(sys, sec, x)
    xdot = rho @ sig
    return W @ xdot \
        + np.einsum("g,abg,b->a", gy[: sys.r], coeffs.constrained, sig) \
        - rho.T @ gx \
        + np.einsum("A,abA,b->a", gy[sys.r:], coeffs.transversal, sig)


def restricted_hj_residual(sys: SystemDefinition, sec: Section, x) -> np.ndarray:
    """Components of the pulled-back two-form on admissible pairs, as an r x r antisymmetric matrix."""
    _, _, rho, coeffs, gy, _, W = _section_data(sys, sec, x)
    U = W @ rho  # U[a, b] = rho_b^i W[a, i]
    cterm = np.einsum("g,abg->ab", gy[: sys.r], coeffs.constrained) \
        + np.einsum("A,abA->ab", gy[sys.r:], coeffs.transversal)
    return (U - U.T) + 0.5 * (cterm - cterm.T)


def energy_pullback(sys: SystemDefinition, sec: Section, x) -> float:
    """Energy along the section: sigma . dLq/dy - Lq at (x, sigma(x), 0)."""
    x = np.asarray(x, dtype=float)
    sig = sec(x)
    return sys.quasi.energy(x, sig)


def denergy_annihilator_residual(sys: SystemDefinition, sec: Section, x) -> np.ndarray:
    """Directional derivatives of the pulled-back energy along the constrained frame."""
    x = np.asarray(x, dtype=float)
    rho = sys.frame.matrix(x)[:, : sys.r]
    grad = fd_gradient(lambda z: energy_pullback(sys, sec, z), x, sec.fd_step)
    return rho.T @ grad


def verify_solution_by_flow(sys: SystemDefinition, sec: Section, x0, T: float,
                            dt: float) -> float:
    """Max deviation between the section-lifted base flow and the full constrained flow.

    Integrates xdot = rho(x) sigma(x) on the base, lifts through the
    section, and compares sample-by-sample against the full second-order
    trajectory started at (x0, sigma(x0)).  Near zero certifies the
    section along this curve.
    """
    x0 = np.asarray(x0, dtype=float)
    if T == 0:
        return 0.0

    def base_rhs(x):
        return sys.frame.matrix(x)[:, : sys.r] @ sec(x)

    full = integrate(sys, ConstrainedState(x=x0, y=sec(x0)), T, dt)
    if full.error:
        raise RuntimeError(f"reference trajectory failed: {full.error}")

    deviation = 0.0
    x = x0.copy()
    k = 0
    t = 0.0
    for t_next in full.times[1:]:
        x = _rk4_step(base_rhs, x, t_next - t)
        t = t_next
        k += 1
        ref = full.states[k]
        deviation = max(deviation,
                        float(np.max(np.abs(x - ref.x))),
                        float(np.max(np.abs(sec(x) - ref.y))))
    return deviation
