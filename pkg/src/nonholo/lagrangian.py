"""Lagrangian evaluation in quasivelocity coordinates.

Given L(x, xdot) and a frame E(x), the quasivelocity Lagrangian is
Lq(x, y_full) = L(x, E(x) y_full).  All derivatives needed by the
dynamics assembly are exposed here, restricted to the constraint
submanifold by appending zeros for the transversal quasivelocities.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .differentiation import (FD_STEP, FD_STEP_SECOND, fd_gradient,
                              fd_jacobian, require_finite)
from .frames import FrameField

GLD_RTOL = 1e-8


@dataclass(frozen=True)
class LagrangianDef:
    """Lagrangian in natural velocities, with optional analytic derivatives.

    The analytic callbacks, when present, are used for every derivative;
    otherwise central finite differences are applied to the quasivelocity
    Lagrangian directly.  ``hess_vx[i, j] = d^2 L / d v_i d x_j``.
    """

    value: Callable[[np.ndarray, np.ndarray], float]
    grad_x: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    grad_v: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    hess_vv: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    hess_vx: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    fd_step: float = FD_STEP
    fd_step_second: float = FD_STEP_SECOND

    @property
    def has_analytic(self):
        return all(cb is not None
                   for cb in (self.grad_x, self.grad_v, self.hess_vv, self.hess_vx))


class QuasiLagrangian:
    """Derivative access to Lq(x, y_full) = L(x, E(x) y_full) on the constraint set.

    All public methods take the constrained quasivelocity y (length r) and
    evaluate at y_full = (y, 0).
    """

    def __init__(self, lagrangian: LagrangianDef, frame: FrameField):
        self.lagrangian = lagrangian
        self.frame = frame
        self.n = frame.n
        self.r = frame.r

    def _y_full(self, y):
        y = np.asarray(y, dtype=float)
        full = np.zeros(self.n)
        full[: self.r] = y
        return full

    def value(self, x, y):
        x = np.asarray(x, dtype=float)
        v = self.frame.matrix(x) @ self._y_full(y)
        return float(self.lagrangian.value(x, v))

    def grad_y(self, x, y):
        """Gradient of Lq in all n quasivelocities at (x, y, 0)."""
        x = np.asarray(x, dtype=float)
        yf = self._y_full(y)
        if self.lagrangian.grad_v is not None:
            E = self.frame.matrix(x)
            g = E.T @ np.asarray(self.lagrangian.grad_v(x, E @ yf), dtype=float)
        else:
            f = lambda z: self.lagrangian.value(x, self.frame.matrix(x) @ z)
            g = fd_gradient(f, yf, self.lagrangian.fd_step)
        return require_finite(g, "in grad_y")

    def grad_x(self, x, y):
        """Gradient of Lq in x at fixed quasivelocities."""
        x = np.asarray(x, dtype=float)
        yf = self._y_full(y)
        if self.lagrangian.has_analytic:
            E = self.frame.matrix(x)
            J = self.frame.matrix_jacobian(x)
            v = E @ yf
            gv = np.asarray(self.lagrangian.grad_v(x, v), dtype=float)
            # d_j Lq = L_x_j + L_v_k (d_j E[k, m]) y_m
            g = np.asarray(self.lagrangian.grad_x(x, v), dtype=float) \
                + np.einsum("k,kmj,m->j", gv, J, yf)
        else:
            f = lambda z: self.lagrangian.value(z, self.frame.matrix(z) @ yf)
            g = fd_gradient(f, x, self.lagrangian.fd_step)
        return require_finite(g, "in grad_x")

    def hess_yy(self, x, y):
        """Full n x n matrix of second quasivelocity derivatives."""
        x = np.asarray(x, dtype=float)
        yf = self._y_full(y)
        if self.lagrangian.hess_vv is not None:
            E = self.frame.matrix(x)
            H = E.T @ np.asarray(self.lagrangian.hess_vv(x, E @ yf), dtype=float) @ E
        else:
            g = lambda z: fd_gradient(
                lambda w: self.lagrangian.value(x, self.frame.matrix(x) @ w),
                z, self.lagrangian.fd_step_second)
            H = fd_jacobian(g, yf, self.lagrangian.fd_step_second)
            H = 0.5 * (H + H.T)
        return require_finite(H, "in hess_yy")

    def hess_yx(self, x, y):
        """Mixed matrix M[a, j] = d^2 Lq / d y_a d x_j at fixed quasivelocities."""
        x = np.asarray(x, dtype=float)
        yf = self._y_full(y)
        if self.lagrangian.has_analytic:
            E = self.frame.matrix(x)
            J = self.frame.matrix_jacobian(x)
            v = E @ yf
            gv = np.asarray(self.lagrangian.grad_v(x, v), dtype=float)
            Hvv = np.asarray(self.lagrangian.hess_vv(x, v), dtype=float)
            Hvx = np.asarray(self.lagrangian.hess_vx(x, v), dtype=float)
            dv = np.einsum("kmj,m->kj", J, yf)  # dv[k, j] = d_j (E[k, m] y_m)
            # M[a, j] = (d_j E[i, a]) L_v_i + E[i, a] (L_vi_xj + L_vi_vk dv[k, j])
            M = np.einsum("iaj,i->aj", J, gv) + E.T @ (Hvx + Hvv @ dv)
        else:
            h2 = self.lagrangian.fd_step_second
            g = lambda z: fd_gradient(
                lambda w: self.lagrangian.value(z, self.frame.matrix(z) @ w), yf, h2)
            M = fd_jacobian(g, x, h2)
        return require_finite(M, "in hess_yx")

    def hessian_GLD(self, x, y):
        """Constrained r x r block of second quasivelocity derivatives."""
        return self.hess_yy(x, y)[: self.r, : self.r]

    def regularity_check(self, x, y):
        """Return ("regular", min_sv) or ("degenerate", min_sv) for the constrained Hessian."""
        G = self.hessian_GLD(x, y)
        sv = np.linalg.svd(G, compute_uv=False)
        smallest = float(sv[-1]) if sv.size else 0.0
        largest = float(sv[0]) if sv.size else 0.0
        verdict = "regular" if smallest > GLD_RTOL * max(1.0, largest) else "degenerate"
        return verdict, smallest

    def energy(self, x, y):
        """Constrained energy y . dLq/dy - Lq at (x, y, 0)."""
        y = np.asarray(y, dtype=float)
        return float(y @ self.grad_y(x, y)[: self.r] - self.value(x, y))


@dataclass
class SystemDefinition:
    """A frame plus a Lagrangian, with cached quasivelocity derivative access."""

    name: str
    frame: FrameField
    lagrangian: LagrangianDef

    @cached_property
    def quasi(self) -> QuasiLagrangian:
        return QuasiLagrangian(self.lagrangian, self.frame)

    @property
    def n(self):
        return self.frame.n

    @property
    def r(self):
        return self.frame.r
