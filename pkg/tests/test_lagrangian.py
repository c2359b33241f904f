"""Quasivelocity Lagrangian derivatives, constrained Hessian, regularity, energy."""

import numpy as np

from nonholo import (FrameField, LagrangianDef, QuasiLagrangian,
                     SystemDefinition, make_free_particle)
from nonholo.systems import make_degenerate_line


def test_grad_y_free_particle_example(free_particle):
    g = free_particle.quasi.grad_y(np.array([0.0, 1.0, 0.0]), np.array([1.0, 1.0]))
    np.testing.assert_allclose(g, [2.0, 1.0, 1.0], atol=1e-12)


def test_grad_y_zero_velocity_pure_kinetic(free_particle):
    g = free_particle.quasi.grad_y(np.array([0.3, -0.8, 2.0]), np.zeros(2))
    np.testing.assert_allclose(g, np.zeros(3), atol=1e-12)


def test_grad_y_fd_matches_chain_rule(free_particle, free_particle_fd):
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.uniform(-2, 2, 3)
        y = rng.uniform(-2, 2, 2)
        np.testing.assert_allclose(free_particle_fd.quasi.grad_y(x, y),
                                   free_particle.quasi.grad_y(x, y), atol=1e-6)


def test_hessian_GLD_values(free_particle):
    G = free_particle.quasi.hessian_GLD(np.array([0.0, 1.0, 0.0]), np.array([0.3, 0.7]))
    np.testing.assert_allclose(G, np.diag([2.0, 1.0]), atol=1e-12)
    G0 = free_particle.quasi.hessian_GLD(np.zeros(3), np.array([1.0, -1.0]))
    np.testing.assert_allclose(G0, np.eye(2), atol=1e-12)


def test_hessian_symmetry_randomized(free_particle_fd):
    rng = np.random.default_rng(9)
    for _ in range(20):
        G = free_particle_fd.quasi.hessian_GLD(rng.uniform(-2, 2, 3),
                                               rng.uniform(-2, 2, 2))
        np.testing.assert_allclose(G, G.T, atol=1e-8)


def test_regularity_free_particle(free_particle):
    rng = np.random.default_rng(13)
    for _ in range(10):
        verdict, smallest = free_particle.quasi.regularity_check(
            rng.uniform(-3, 3, 3), rng.uniform(-3, 3, 2))
        assert verdict == "regular"
        assert smallest >= 1.0 - 1e-9


def test_regularity_degenerate_system():
    sys_ = make_degenerate_line()
    verdict, smallest = sys_.quasi.regularity_check(np.zeros(2), np.array([1.0]))
    assert verdict == "degenerate"
    assert smallest < 1e-12


def test_scaling_lagrangian_scales_hessian(free_particle):
    scaled = SystemDefinition(
        name="scaled",
        frame=free_particle.frame,
        lagrangian=LagrangianDef(
            value=lambda x, v: 2.0 * free_particle.lagrangian.value(x, v)))
    x = np.array([0.5, 1.2, -0.4])
    y = np.array([0.7, -0.2])
    G1 = free_particle.quasi.hessian_GLD(x, y)
    G2 = scaled.quasi.hessian_GLD(x, y)
    np.testing.assert_allclose(G2, 2.0 * G1, atol=1e-6)
    assert scaled.quasi.regularity_check(x, y)[0] == "regular"


def test_energy_examples(free_particle):
    q = free_particle.quasi
    assert abs(q.energy(np.zeros(3), np.array([1.0, 1.0])) - 1.0) < 1e-12
    assert abs(q.energy(np.array([0.0, 1.0, 0.0]), np.array([1.0, 1.0])) - 1.5) < 1e-12
    assert abs(q.energy(np.array([2.0, -1.0, 0.5]), np.zeros(2))) < 1e-12


def test_energy_invariant_under_constrained_basis_change(free_particle):
    # mix the constrained columns: e'_1 = e_1 + e_2, e'_2 = e_2
    T = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    base = free_particle.frame
    mixed = FrameField(n=3, r=2, basis=lambda x, b=base: b.basis(x) @ T)
    alt = SystemDefinition(name="mixed", frame=mixed,
                           lagrangian=free_particle.lagrangian)
    Tc_inv = np.linalg.inv(T[:2, :2])
    rng = np.random.default_rng(17)
    for _ in range(10):
        x = rng.uniform(-2, 2, 3)
        y = rng.uniform(-2, 2, 2)
        y_mixed = Tc_inv @ y
        assert abs(free_particle.quasi.energy(x, y)
                   - alt.quasi.energy(x, y_mixed)) < 1e-8
