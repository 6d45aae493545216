"""Quartic energy descent: closed-form target, contracts, determinism."""

import numpy as np
import pytest

from cornergl.descent import minimize_quartic_energy
from cornergl.errors import ConvergenceError
from cornergl.gauge import trivial_links
from cornergl.grid import rectangle_grid
from cornergl.operators import assemble_kinetic_form


@pytest.fixture(scope="module")
def free_box():
    grid = rectangle_grid((0.0, 0.0), (2.0, 1.0), 0.1)
    K = assemble_kinetic_form(grid, trivial_links(grid))
    return grid, K, grid.quad_weights()


def test_constant_minimizer_closed_form(free_box):
    # with no field and free boundary the minimizer is spatially
    # constant: t^2 = -c2/(2 c4), E = -c2^2 Q / (4 c4), Q the total area
    grid, K, q = free_box
    mu = 0.55
    c2, c4 = -mu, mu / 2
    Q = q.sum()
    rng = np.random.default_rng(0)
    w0 = 0.1 * (rng.standard_normal(len(q)) + 1j * rng.standard_normal(len(q)))
    res = minimize_quartic_energy(K, q, c2, c4, w0, tol=1e-10)
    assert res.converged
    expected = -c2 * c2 * Q / (4 * c4)
    assert res.energy == pytest.approx(expected, rel=1e-9)
    amp = np.abs(res.field)
    assert amp.max() - amp.min() < 1e-5
    assert amp.mean() == pytest.approx(1.0, abs=1e-6)


def test_zero_iterations_when_started_at_minimum(free_box):
    grid, K, q = free_box
    c2, c4 = -0.5, 0.25
    w0 = np.ones(len(q), dtype=complex)  # exact stationary point
    res = minimize_quartic_energy(K, q, c2, c4, w0, tol=1e-8)
    assert res.iterations == 0
    assert res.converged
    assert res.energy == pytest.approx(-0.25 * q.sum(), rel=1e-12)


def test_positive_quadratic_term_descends_to_zero(free_box):
    grid, K, q = free_box
    rng = np.random.default_rng(1)
    w0 = rng.standard_normal(len(q)) + 1j * rng.standard_normal(len(q))
    res = minimize_quartic_energy(K, q, 0.3, 0.15, w0, tol=1e-10)
    assert res.converged
    assert abs(res.energy) < 1e-12
    assert np.abs(res.field).max() < 1e-4


def test_iteration_cap_raises_with_best(free_box):
    grid, K, q = free_box
    rng = np.random.default_rng(2)
    w0 = rng.standard_normal(len(q)) + 1j * rng.standard_normal(len(q))
    with pytest.raises(ConvergenceError) as info:
        minimize_quartic_energy(K, q, -0.5, 0.25, w0, tol=1e-12, maxiter=2)
    err = info.value
    assert err.iterations == 2
    assert err.residual > 0
    assert err.best.converged is False
    assert err.best.iterations == 2
    assert err.best.field.shape == w0.shape


def test_descent_is_deterministic(free_box):
    grid, K, q = free_box
    rng = np.random.default_rng(3)
    w0 = rng.standard_normal(len(q)) + 1j * rng.standard_normal(len(q))
    r1 = minimize_quartic_energy(K, q, -0.5, 0.25, w0, tol=1e-9)
    r2 = minimize_quartic_energy(K, q, -0.5, 0.25, w0, tol=1e-9)
    assert r1.iterations == r2.iterations
    assert np.array_equal(r1.field, r2.field)
    assert r1.energy == r2.energy


def test_energy_never_increases_from_start(free_box):
    grid, K, q = free_box
    rng = np.random.default_rng(4)
    w0 = rng.standard_normal(len(q)) + 1j * rng.standard_normal(len(q))
    c2, c4 = -0.5, 0.25
    Kw0 = K @ w0
    p = np.abs(w0) ** 2
    e0 = np.vdot(w0, Kw0).real + c2 * np.sum(q * p) + c4 * np.sum(q * p * p)
    res = minimize_quartic_energy(K, q, c2, c4, w0, tol=1e-8)
    assert res.energy <= e0 + 1e-12
