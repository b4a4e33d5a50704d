"""Lagrangian grid construction and the map back to Eulerian densities.

A density u on the torus [0, 1] is described by its inverse distribution
function G(ω), ω ∈ [0, M], and g = ∂_ω G satisfies u(G(ω)) = 1/g(ω).
"""

import logging
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .basis import cell_weights, locate
from .errors import (
    AsymmetricDatumError,
    ConfigError,
    LabelOutOfRangeError,
    NonPositiveDensityError,
    NonPositiveGError,
    NonUniformMeshError,
)
from .models import EulerianSamples, LagrangianGrid, TrajectorySet, WeightVector

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


def _const(x: np.ndarray) -> np.ndarray:
    return np.ones_like(x)


def _cos2(x: np.ndarray) -> np.ndarray:
    return np.cos(2.0 * np.pi * x) ** 2 + 0.01


def _cos2_offset(x: np.ndarray) -> np.ndarray:
    return np.cos(2.0 * np.pi * x) ** 2 + 0.1


def _root5(x: np.ndarray) -> np.ndarray:
    return (np.abs(x - 0.5) + 1e-4) ** 0.2 - 0.1


PRESETS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "const": _const,
    "cos2": _cos2,
    "cos2_offset": _cos2_offset,
    "root5": _root5,
}


def preset_samples(name: str, n_cells: int) -> EulerianSamples:
    """Evaluate a named initial datum on the uniform grid x_j = j/N."""
    if name not in PRESETS:
        raise ConfigError(f"Unknown initial preset: {name}")
    x = np.arange(n_cells + 1) / n_cells
    # evaluate on min(x, 1 - x) so mirrored nodes see identical arguments
    return EulerianSamples(x_nodes=x, u_values=PRESETS[name](np.minimum(x, 1.0 - x)))


def load_samples(path: Path) -> EulerianSamples:
    """Read a two-column (x, u) text file."""
    try:
        data = np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as e:
        raise ConfigError(f"Cannot read initial datum {path}: {e}") from e
    if data.shape[1] != 2:
        raise ConfigError(f"Initial datum {path} must have two columns")
    return EulerianSamples(x_nodes=data[:, 0], u_values=data[:, 1])


def initial_samples(initial: str, n_cells: int) -> EulerianSamples:
    """Resolve a preset name or file path to samples with N cells."""
    if initial in PRESETS:
        return preset_samples(initial, n_cells)
    path = Path(initial)
    if not path.exists():
        raise ConfigError(f"Initial datum is neither a preset nor a file: {initial}")
    samples = load_samples(path)
    if samples.n_cells != n_cells:
        raise ConfigError(
            f"Initial datum {path} has {samples.n_cells} cells, config asks for {n_cells}"
        )
    return samples


def build_initial(samples: EulerianSamples) -> tuple[LagrangianGrid, WeightVector]:
    """Lagrangian grid and weights of a uniformly sampled initial density.

    With g_j = 1/u(x_j) and a linear ansatz for G on each x-cell the labels
    follow ω_{j+1} = ω_j + (2/N)/(g_j + g_{j+1}); all bump weights vanish.
    """
    n = samples.n_cells
    x = samples.x_nodes
    u = samples.u_values
    if np.max(np.abs(x - np.arange(n + 1) / n)) > 1e-12:
        raise NonUniformMeshError("initial samples must lie on the uniform grid j/N")
    if np.any(u <= 0.0):
        j = int(np.argmin(u))
        raise NonPositiveDensityError(f"u(x_{j}) = {u[j]} is not positive")
    if np.max(np.abs(u - u[::-1])) > SYMMETRY_TOL * np.max(np.abs(u)):
        raise AsymmetricDatumError("initial datum violates u(x) = u(1 - x)")

    g = 1.0 / u
    omega = np.concatenate([[0.0], np.cumsum((2.0 / n) / (g[:-1] + g[1:]))])
    grid = LagrangianGrid(omega=omega)
    weights = WeightVector(lin=g[1:], quad=np.zeros(n))
    logger.debug(f"Initial grid with N={n}, M={grid.total_mass:.17g}")
    return grid, weights


def node_values(g: np.ndarray, n: int) -> np.ndarray:
    """g at ω_0..ω_N, with g(ω_0) = g(ω_N)."""
    lin = np.asarray(g, dtype=float)[:n]
    return np.concatenate([lin[-1:], lin])


def cell_masses(grid: LagrangianGrid, g: np.ndarray) -> np.ndarray:
    """Exact ∫ g over each cell."""
    w = cell_weights(grid, g)
    return grid.delta * (0.5 * (w[:, 0] + w[:, 1]) + 2.0 * w[:, 2] / 3.0)


def lagrangian_map(grid: LagrangianGrid, g: np.ndarray, omega) -> np.ndarray:
    """G(ω) = ∫_0^ω g, integrated exactly."""
    nodes = np.concatenate([[0.0], np.cumsum(cell_masses(grid, g))])
    cell, s = locate(grid, omega)
    a, b, q = cell_weights(grid, g)[cell].T
    partial = a * s + 0.5 * (b - a) * s**2 + 4.0 * q * (s**2 / 2.0 - s**3 / 3.0)
    return nodes[cell] + grid.delta[cell] * partial


def min_g(grid: LagrangianGrid, g: np.ndarray) -> float:
    """Smallest value of g over nodes, midpoints and interior extrema."""
    a, b, q = cell_weights(grid, g).T
    candidates = [a, b, 0.5 * (a + b) + q]
    with np.errstate(divide="ignore", invalid="ignore"):
        star = 0.5 + (b - a) / (8.0 * q)
    inside = (q != 0.0) & (star > 0.0) & (star < 1.0)
    star = np.where(inside, star, 0.5)
    candidates.append(a + (b - a) * star + 4.0 * q * star * (1.0 - star))
    return float(np.min(candidates))


def check_positive(grid: LagrangianGrid, g: np.ndarray) -> None:
    value = min_g(grid, g)
    if not value > 0.0:
        raise NonPositiveGError(f"g attains {value:.6g} <= 0")


def reconstruct_eulerian(grid: LagrangianGrid, g: np.ndarray) -> EulerianSamples:
    """Moving mesh x_j = G(ω_j) with values u_j = 1/g(ω_j)."""
    check_positive(grid, g)
    x = np.concatenate([[0.0], np.cumsum(cell_masses(grid, g))])
    return EulerianSamples(x_nodes=x, u_values=1.0 / node_values(g, grid.n_cells))


def default_labels(grid: LagrangianGrid, count: int) -> np.ndarray:
    """Equally spaced mass labels M(p - 1/2)/P."""
    return grid.total_mass * (np.arange(count) + 0.5) / count


def trace_particles(
    grid: LagrangianGrid,
    g_sequence: Sequence[np.ndarray],
    labels,
    times: Optional[Sequence[float]] = None,
) -> TrajectorySet:
    """Positions x_p(t_n) = G^n(ω_p) of particles with fixed mass labels."""
    labels = np.asarray(labels, dtype=float)
    m = grid.total_mass
    if np.any(labels <= 0.0) or np.any(labels >= m):
        raise LabelOutOfRangeError(f"particle labels must lie in (0, {m})")
    if times is None:
        times = np.arange(len(g_sequence), dtype=float)
    positions = np.array([lagrangian_map(grid, g, labels) for g in g_sequence])
    return TrajectorySet(
        labels=labels,
        times=times,
        positions=positions.reshape(len(g_sequence), labels.size),
    )
