"""Central finite-difference kernels used as the default derivative backend.

Steps are scaled per component as h_i = base * max(1, |x_i|).  First
derivatives use base 1e-6; nested second derivatives use the larger base
1e-4 to balance truncation against roundoff.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericDomainError

FD_STEP = 1e-6
FD_STEP_SECOND = 1e-4


def _steps(x, base):
    x = np.asarray(x, dtype=float)
    return base * np.maximum(1.0, np.abs(x))


def require_finite(value, context=""):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NumericDomainError(f"non-finite values encountered {context}".strip())
    return arr


def fd_gradient(f, x, base=FD_STEP):
    """Central-difference gradient of a scalar function f: R^n -> R."""
    x = np.asarray(x, dtype=float)
    h = _steps(x, base)
    g = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        g[i] = (f(xp) - f(xm)) / (2.0 * h[i])
    return require_finite(g, "in fd_gradient")


def fd_jacobian(f, x, base=FD_STEP):
    """Central-difference Jacobian of f: R^n -> R^m, shape (m, n)."""
    x = np.asarray(x, dtype=float)
    h = _steps(x, base)
    cols = []
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        cols.append((np.asarray(f(xp), dtype=float) - np.asarray(f(xm), dtype=float)) / (2.0 * h[i]))
    return require_finite(np.stack(cols, axis=-1), "in fd_jacobian")


def fd_hessian(f, x, base=FD_STEP_SECOND):
    """Nested central-difference Hessian of a scalar f: R^n -> R^n x R^n."""
    grad = lambda z: fd_gradient(f, z, base)
    hess = fd_jacobian(grad, x, base)
    return 0.5 * (hess + hess.T)
