"""Moving frames adapted to a velocity distribution.

A frame is an invertible matrix field E(x) on a single global chart R^n.
Its first r columns span the admissible directions; the remaining n - r
columns complete the basis.  Lie brackets of the frame fields and the
resulting structure coefficients are computed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .differentiation import FD_STEP, fd_jacobian, require_finite
from .errors import FrameDegenerateError

COND_MAX = 1e12
RANK_RTOL = 1e-8


@dataclass(frozen=True)
class FrameField:
    """Frame E(x): columns 0..r-1 are the constrained vectors, the rest complete the basis.

    ``jacobian``, when supplied, returns the tensor J with
    J[i, c, j] = d E[i, c] / d x_j; otherwise central differences with
    ``fd_step`` are used.
    """

    n: int
    r: int
    basis: Callable[[np.ndarray], np.ndarray]
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: float = FD_STEP

    def __post_init__(self):
        if not (1 <= self.r <= self.n):
            raise ValueError(f"need 1 <= r <= n, got r={self.r}, n={self.n}")

    def matrix(self, x):
        """Evaluate E(x), checking shape, finiteness and conditioning."""
        E = require_finite(self.basis(np.asarray(x, dtype=float)), "in frame basis")
        if E.shape != (self.n, self.n):
            raise ValueError(f"frame matrix has shape {E.shape}, expected {(self.n, self.n)}")
        cond = np.linalg.cond(E)
        if not np.isfinite(cond) or cond > COND_MAX:
            raise FrameDegenerateError(f"frame condition number {cond:.3e} exceeds {COND_MAX:.1e}")
        return E

    def matrix_jacobian(self, x):
        """Tensor J[i, c, j] = d E[i, c] / d x_j at x."""
        x = np.asarray(x, dtype=float)
        if self.jacobian is not None:
            J = require_finite(self.jacobian(x), "in frame jacobian")
        else:
            flat = lambda z: np.asarray(self.basis(z), dtype=float).reshape(-1)
            J = fd_jacobian(flat, x, self.fd_step).reshape(self.n, self.n, self.n)
        return J

    def constrained_columns(self, x):
        """The n x r block of admissible frame vectors at x."""
        return self.matrix(x)[:, : self.r]


@dataclass(frozen=True)
class StructureCoefficients:
    """Expansion coefficients of the frame brackets at a point.

    ``constrained[a, b, g]`` multiplies the constrained vector g in the
    bracket of constrained vectors (a, b); ``transversal[a, b, A]``
    multiplies complement vector A.  Both are antisymmetric in (a, b).
    """

    constrained: np.ndarray
    transversal: np.ndarray
    x: np.ndarray = field(repr=False)


def lie_bracket(frame: FrameField, a: int, b: int, x) -> np.ndarray:
    """Bracket of frame columns a and b at x: (E_a . grad) E_b - (E_b . grad) E_a."""
    x = np.asarray(x, dtype=float)
    E = frame.matrix(x)
    J = frame.matrix_jacobian(x)
    # [e_a, e_b]^i = e_a^j d_j e_b^i - e_b^j d_j e_a^i
    return J[:, b, :] @ E[:, a] - J[:, a, :] @ E[:, b]


def structure_coefficients(frame: FrameField, x) -> StructureCoefficients:
    """Solve E(x) c = [e_a, e_b](x) for every constrained pair a < b."""
    x = np.asarray(x, dtype=float)
    r, n = frame.r, frame.n
    E = frame.matrix(x)
    J = frame.matrix_jacobian(x)
    constrained = np.zeros((r, r, r))
    transversal = np.zeros((r, r, n - r))
    for a in range(r):
        for b in range(a + 1, r):
            bracket = J[:, b, :] @ E[:, a] - J[:, a, :] @ E[:, b]
            try:
                c = np.linalg.solve(E, bracket)
            except np.linalg.LinAlgError as exc:
                raise FrameDegenerateError(f"singular frame at {x}") from exc
            constrained[a, b] = c[:r]
            constrained[b, a] = -c[:r]
            transversal[a, b] = c[r:]
            transversal[b, a] = -c[r:]
    return StructureCoefficients(constrained=constrained, transversal=transversal, x=x)


def frame_from_B(n: int, r: int, B: Callable[[np.ndarray], np.ndarray],
                 B_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
                 fd_step: float = FD_STEP) -> FrameField:
    """Block frame for constraints of the form xdot_A = B[A, a] xdot_a.

    Constrained column a is the coordinate direction a plus B[:, a] in the
    complement rows; complement columns are the remaining coordinate
    directions.  ``B_jacobian``, if given, maps x to the tensor
    dB[A, a, j] = d B[A, a] / d x_j.
    """
    m = n - r

    def basis(x):
        E = np.eye(n)
        E[r:, :r] = np.asarray(B(x), dtype=float).reshape(m, r)
        return E

    jac = None
    if B_jacobian is not None:
        def jac(x):
            J = np.zeros((n, n, n))
            J[r:, :r, :] = np.asarray(B_jacobian(x), dtype=float).reshape(m, r, n)
            return J

    return FrameField(n=n, r=r, basis=basis, jacobian=jac, fd_step=fd_step)


def bracket_generating_rank(frame: FrameField, x, max_depth: int) -> int:
    """Numerical rank at x of the span of iterated brackets up to max_depth levels."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    x = np.asarray(x, dtype=float)

    def column_field(i):
        return lambda z: frame.matrix(z)[:, i]

    def bracket_field(X, Y):
        def field_(z):
            JX = fd_jacobian(X, z, frame.fd_step)
            JY = fd_jacobian(Y, z, frame.fd_step)
            return JY @ X(z) - JX @ Y(z)
        return field_

    base = [column_field(i) for i in range(frame.r)]
    accumulated = list(base)
    newest = list(base)
    for _ in range(max_depth - 1):
        newest = [bracket_field(X, Y) for X in base for Y in newest]
        accumulated.extend(newest)
        if _numerical_rank(accumulated, x) >= frame.n:
            break
    return _numerical_rank(accumulated, x)


def _numerical_rank(fields, x):
    M = np.stack([f(x) for f in fields], axis=1)
    sv = np.linalg.svd(M, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > RANK_RTOL * sv[0]))
