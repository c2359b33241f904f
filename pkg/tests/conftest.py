"""Shared fixtures and closed-form reference values for the test suite."""

import numpy as np
import pytest

from nonholo import make_free_particle, make_holonomic_plane


@pytest.fixture(scope="session")
def free_particle():
    return make_free_particle(analytic=True)


@pytest.fixture(scope="session")
def free_particle_fd():
    return make_free_particle(analytic=False)


@pytest.fixture(scope="session")
def holonomic_plane():
    return make_holonomic_plane()


def closed_form_accel(x, y):
    """Hand-derived accelerations for the constrained free particle."""
    return np.array([-x[1] / (1.0 + x[1] ** 2) * y[0] * y[1], 0.0])


def closed_form_flow(x0, lam, t):
    """Closed-form base flow of the restricted family sigma_lam.

    lam = (lam_1, lam_2) with sigma = (lam_1 / sqrt(1 + x_2^2), lam_2).
    """
    x0 = np.asarray(x0, dtype=float)
    l1, l2 = float(lam[0]), float(lam[1])
    if l2 != 0.0:
        x2 = x0[1] + l2 * t
        x1 = x0[0] + (l1 / l2) * (np.arcsinh(x2) - np.arcsinh(x0[1]))
        x3 = x0[2] + (l1 / l2) * (np.sqrt(1.0 + x2 ** 2) - np.sqrt(1.0 + x0[1] ** 2))
    else:
        d = np.sqrt(1.0 + x0[1] ** 2)
        x1 = x0[0] + (l1 / d) * t
        x2 = x0[1]
        x3 = x0[2] + (l1 * x0[1] / d) * t
    return np.array([x1, x2, x3])


def lattice(bounds, count, dim):
    """Deterministic dim-dimensional lattice with `count` nodes per axis."""
    axis = np.linspace(bounds[0], bounds[1], count)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)
