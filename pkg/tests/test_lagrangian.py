"""Tests for grid construction, reconstruction and particle tracing."""

import numpy as np
import pytest

from wasserstein_bdf.basis import mass, steady_state
from wasserstein_bdf.errors import (
    AsymmetricDatumError,
    ConfigError,
    LabelOutOfRangeError,
    NonPositiveDensityError,
    NonPositiveGError,
    NonUniformMeshError,
)
from wasserstein_bdf.lagrangian import (
    build_initial,
    default_labels,
    initial_samples,
    lagrangian_map,
    min_g,
    preset_samples,
    reconstruct_eulerian,
    trace_particles,
)
from wasserstein_bdf.models import EulerianSamples, LagrangianGrid


def test_build_initial_constant():
    """Test that u = 1 gives the uniform grid with g = 1."""
    grid, weights = build_initial(preset_samples("const", 4))
    assert grid.total_mass == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(grid.omega, np.linspace(0.0, 1.0, 5), atol=1e-15)
    np.testing.assert_allclose(weights.lin, 1.0)
    np.testing.assert_array_equal(weights.quad, 0.0)


def test_build_initial_cos2():
    """Test the mass of the cos² datum and unit mass of g."""
    grid, weights = build_initial(preset_samples("cos2", 100))
    assert grid.total_mass == pytest.approx(0.51, abs=5e-3)
    assert grid.is_symmetric(1e-10)
    assert mass(grid, weights.to_array()) == pytest.approx(1.0, abs=1e-10)


def test_build_initial_root5():
    """Test the root datum and its minimum at x = 1/2."""
    samples = preset_samples("root5", 100)
    assert samples.u_values.min() == pytest.approx(0.0585, abs=1e-4)
    grid, weights = build_initial(samples)
    assert mass(grid, weights.to_array()) == pytest.approx(1.0, abs=1e-10)


def test_build_initial_rejects_bad_data():
    """Test the datum checks."""
    x = np.linspace(0.0, 1.0, 5)
    with pytest.raises(NonPositiveDensityError):
        build_initial(EulerianSamples(x_nodes=x, u_values=[1.0, 0.5, 0.0, 0.5, 1.0]))
    with pytest.raises(AsymmetricDatumError):
        build_initial(EulerianSamples(x_nodes=x, u_values=1.0 + 0.1 * x))
    with pytest.raises(NonUniformMeshError):
        build_initial(
            EulerianSamples(x_nodes=[0.0, 0.2, 0.5, 0.8, 1.0], u_values=np.ones(5))
        )


def test_initial_samples_sources(tmp_path):
    """Test preset lookup and two-column files."""
    with pytest.raises(ConfigError):
        initial_samples("no-such-preset", 4)

    path = tmp_path / "datum.txt"
    x = np.linspace(0.0, 1.0, 9)
    np.savetxt(path, np.column_stack([x, 2.0 + np.cos(2 * np.pi * x)]))
    samples = initial_samples(str(path), 8)
    assert samples.n_cells == 8
    with pytest.raises(ConfigError, match="config asks for 4"):
        initial_samples(str(path), 4)

    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 2\n1 1 2\n")
    with pytest.raises(ConfigError):
        initial_samples(str(bad), 1)


def test_reconstruct_eulerian():
    """Test the moving mesh of g = 2 on a grid of mass 1/2."""
    grid = LagrangianGrid(omega=[0.0, 0.25, 0.5])
    samples = reconstruct_eulerian(grid, np.array([2.0, 2.0, 0.0, 0.0]))
    np.testing.assert_allclose(samples.x_nodes, [0.0, 0.5, 1.0])
    np.testing.assert_allclose(samples.u_values, 0.5)


def test_reconstruct_eulerian_closes_torus(make_grid, make_weights):
    """Test that a unit-mass g maps ω_N onto x = 1."""
    grid = make_grid(9, 0.7)
    g = make_weights(grid)
    samples = reconstruct_eulerian(grid, g)
    assert samples.x_nodes[-1] == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(
        lagrangian_map(grid, g, grid.omega), samples.x_nodes, atol=1e-14
    )


def test_reconstruct_eulerian_rejects_negative(uniform_grid):
    """Test that non-positive g is refused."""
    g = np.array([1.0, -1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    with pytest.raises(NonPositiveGError):
        reconstruct_eulerian(uniform_grid, g)


def test_min_g(uniform_grid):
    """Test minima at cell midpoints and at interior extrema."""
    dipped = np.array([1.0, 1.0, 1.0, 1.0, -0.5, 0.0, 0.0, 0.0])
    assert min_g(uniform_grid, dipped) == pytest.approx(0.5)

    skewed = np.array([1.0, 1.0, 1.0, 0.1, -0.4, 0.0, 0.0, 0.0])
    assert min_g(uniform_grid, skewed) == pytest.approx(0.0234375)


def test_trace_particles_steady(make_grid):
    """Test that particles stay at ω_p/M under the constant density."""
    grid = make_grid(10, 0.51)
    labels = default_labels(grid, 50)
    trajectories = trace_particles(grid, [steady_state(grid)] * 3, labels)
    for row in trajectories.positions:
        np.testing.assert_allclose(row, labels / grid.total_mass, rtol=1e-12)
    assert trajectories.is_monotone()


def test_trace_particles_median(make_grid, make_weights):
    """Test that the median label of a symmetric state sits at x = 1/2."""
    grid = make_grid(8)
    g = make_weights(grid)
    trajectories = trace_particles(grid, [g], [grid.total_mass / 2.0])
    assert trajectories.positions[0, 0] == pytest.approx(0.5, abs=1e-12)


def test_trace_particles_label_range(uniform_grid):
    """Test that labels must lie inside (0, M)."""
    g = steady_state(uniform_grid)
    with pytest.raises(LabelOutOfRangeError):
        trace_particles(uniform_grid, [g], [0.0, 0.5])
    with pytest.raises(LabelOutOfRangeError):
        trace_particles(uniform_grid, [g], [1.0])


def test_default_labels(uniform_grid):
    """Test the midpoint labels M(p - 1/2)/P."""
    labels = default_labels(uniform_grid, 4)
    np.testing.assert_allclose(labels, [0.125, 0.375, 0.625, 0.875])
