"""Tests for the BDF objective."""

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from wasserstein_bdf.basis import (
    assemble,
    mass_coefficients,
    steady_state,
    wasserstein_sq,
)
from wasserstein_bdf.bdf_flow import (
    bdf_coefficients,
    objective,
    objective_gradient,
    objective_hessian,
)
from wasserstein_bdf.entropy import EntropyModel
from wasserstein_bdf.errors import HistoryLengthMismatchError, UnsupportedOrderError
from wasserstein_bdf.oracle import finite_difference_gradient

TAU = 1e-3


@pytest.fixture
def setup(make_grid, make_weights):
    grid = make_grid(6)
    return grid, assemble(grid), [make_weights(grid) for _ in range(3)]


def test_bdf_coefficients():
    """Test the coefficient tables."""
    assert bdf_coefficients(1).a == [-1.0, 1.0]
    assert bdf_coefficients(2).a == [0.5, -2.0, 1.5]
    with pytest.raises(UnsupportedOrderError):
        bdf_coefficients(3)
    with pytest.raises(UnsupportedOrderError):
        bdf_coefficients(0)


def test_objective_at_history(setup):
    """Test that the movement term vanishes when g equals a flat history."""
    grid, Mw, (g, _, _) = setup
    model = EntropyModel(-1.0)
    for k in (1, 2):
        value = objective(bdf_coefficients(k), TAU, Mw, model, grid, [g] * k, g)
        assert value == pytest.approx(model.value(grid, g), rel=1e-14)


def test_objective_bdf2(setup):
    """Test the BDF-2 objective against its definition."""
    grid, Mw, (g, h0, h1) = setup
    model = EntropyModel(-2.0)
    expected = (
        -(0.5 * wasserstein_sq(Mw, g, h0) - 2.0 * wasserstein_sq(Mw, g, h1)) / (2.0 * TAU)
        + model.value(grid, g)
    )
    value = objective(bdf_coefficients(2), TAU, Mw, model, grid, [h0, h1], g)
    assert value == pytest.approx(expected, rel=1e-12)


def test_objective_history_length(setup):
    """Test that the history must hold k states."""
    grid, Mw, (g, h0, h1) = setup
    model = EntropyModel(-1.0)
    with pytest.raises(HistoryLengthMismatchError):
        objective(bdf_coefficients(2), TAU, Mw, model, grid, [h0], g)
    with pytest.raises(HistoryLengthMismatchError):
        objective_gradient(bdf_coefficients(1), TAU, Mw, model, grid, [h0, h1], g)
    with pytest.raises(HistoryLengthMismatchError):
        objective_hessian(bdf_coefficients(1), TAU, Mw, model, grid, [], g)


@pytest.mark.parametrize("alpha", [-1.0, -2.0])
def test_objective_gradient_finite_differences(alpha, setup):
    """Test the objective gradient against central differences."""
    grid, Mw, (g, h0, h1) = setup
    scheme = bdf_coefficients(2)
    model = EntropyModel(alpha)
    gradient = objective_gradient(scheme, TAU, Mw, model, grid, [h0, h1], g)
    fd = finite_difference_gradient(
        lambda v: objective(scheme, TAU, Mw, model, grid, [h0, h1], v), g
    )
    assert np.max(np.abs(gradient - fd)) <= 1e-6 * (1.0 + np.max(np.abs(gradient)))


def test_objective_hessian(setup):
    """Test (3/(2τ)) M_w + Hess S for BDF-2."""
    grid, Mw, (g, h0, h1) = setup
    model = EntropyModel(-1.0)
    hessian = objective_hessian(bdf_coefficients(2), TAU, Mw, model, grid, [h0, h1], g)
    np.testing.assert_allclose(
        hessian, 1.5 / TAU * Mw.entries + model.hessian(grid, g), rtol=1e-14
    )
    assert np.linalg.eigvalsh(hessian).min() > 0.0


@pytest.mark.parametrize("alpha", [-1.0, -2.0])
def test_objective_line_integral(alpha, setup):
    """Test Ψ(g) - Ψ(g*) against the line integral of the gradient."""
    grid, Mw, (g, h0, h1) = setup
    scheme = bdf_coefficients(2)
    model = EntropyModel(alpha)
    start = h1

    nodes, weights = leggauss(10)
    nodes, weights = 0.5 * (nodes + 1.0), 0.5 * weights
    def gradient(point):
        return objective_gradient(scheme, TAU, Mw, model, grid, [h0, h1], point)

    def value(point):
        return objective(scheme, TAU, Mw, model, grid, [h0, h1], point)

    step = g - start
    integral = sum(
        w * gradient(start + t * step) @ step for t, w in zip(nodes, weights)
    )
    difference = value(g) - value(start)
    assert difference == pytest.approx(integral, rel=1e-8)


@pytest.mark.parametrize("alpha", [-0.5, -1.0, -2.0])
def test_steady_state_is_critical(alpha, make_grid):
    """Test that the constant density satisfies ∇Ψ ∥ c for a flat history."""
    grid = make_grid(8, 0.6)
    Mw = assemble(grid)
    g_inf = steady_state(grid)
    c = mass_coefficients(grid)
    gradient = objective_gradient(
        bdf_coefficients(2), TAU, Mw, EntropyModel(alpha), grid, [g_inf, g_inf], g_inf
    )
    factor = (gradient @ c) / (c @ c)
    scale = np.max(np.abs(gradient))
    np.testing.assert_allclose(gradient, factor * c, atol=1e-12 * scale)
