"""Brute-force reference computations used to cross-check the fast paths."""

import logging
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .basis import evaluate
from .errors import MassMismatchError
from .lagrangian import lagrangian_map, node_values, reconstruct_eulerian
from .models import EulerianSamples, LagrangianGrid, RunConfig
from .service import FlowService

logger = logging.getLogger(__name__)

COMPARISON_POINTS = 1000
# relative tolerance on the totals of sampled distribution functions
MASS_RTOL = 1e-8


def comparison_grid(points: int = COMPARISON_POINTS) -> np.ndarray:
    """Fixed uniform Eulerian grid for comparing densities across meshes."""
    return np.linspace(0.0, 1.0, points)


def wasserstein_bruteforce(
    u1: EulerianSamples, u2: EulerianSamples, resolution: int = 1_000_000
) -> float:
    """∫_0^M (G_1 - G_2)² dω from inverted sampled distribution functions.

    Each density is treated as piecewise linear in x, its distribution
    function is accumulated with the trapezoid rule and inverted by linear
    interpolation; the ω-integral uses the composite midpoint rule.
    """
    cdf1 = cumulative_trapezoid(u1.u_values, u1.x_nodes, initial=0.0)
    cdf2 = cumulative_trapezoid(u2.u_values, u2.x_nodes, initial=0.0)
    m1, m2 = cdf1[-1], cdf2[-1]
    if abs(m1 - m2) > MASS_RTOL * max(m1, m2):
        raise MassMismatchError(f"masses differ: {m1:.17g} vs {m2:.17g}")
    omega = (np.arange(resolution) + 0.5) * (m1 / resolution)
    inverse1 = np.interp(omega, cdf1, u1.x_nodes)
    inverse2 = np.interp(omega * (m2 / m1), cdf2, u2.x_nodes)
    return float(np.sum((inverse1 - inverse2) ** 2) * (m1 / resolution))


def dense_samples(
    grid: LagrangianGrid, g: np.ndarray, per_cell: int = 200
) -> EulerianSamples:
    """Eulerian samples (G(ω), 1/g(ω)) on a refined ω-grid of the FE state."""
    s = np.arange(per_cell) / per_cell
    omega = (grid.omega[:-1, None] + grid.delta[:, None] * s[None, :]).ravel()
    omega = np.append(omega, grid.total_mass)
    return EulerianSamples(
        x_nodes=lagrangian_map(grid, g, omega), u_values=1.0 / evaluate(grid, g, omega)
    )


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], g: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Central differences with step h·max(1, |g_i|)."""
    g = np.asarray(g, dtype=float)
    out = np.empty_like(g)
    for i in range(g.size):
        step = h * max(1.0, abs(g[i]))
        plus, minus = g.copy(), g.copy()
        plus[i] += step
        minus[i] -= step
        out[i] = (f(plus) - f(minus)) / (2.0 * step)
    return out


def finite_difference_hessian(
    gradient: Callable[[np.ndarray], np.ndarray], g: np.ndarray, h: float = 1e-4
) -> np.ndarray:
    """Hessian by central differences of a gradient, symmetrized."""
    g = np.asarray(g, dtype=float)
    columns = []
    for i in range(g.size):
        step = h * max(1.0, abs(g[i]))
        plus, minus = g.copy(), g.copy()
        plus[i] += step
        minus[i] -= step
        columns.append((gradient(plus) - gradient(minus)) / (2.0 * step))
    hess = np.stack(columns, axis=1)
    return 0.5 * (hess + hess.T)


class ReferenceSnapshot:
    """Converged state of a reference run at its final time."""

    def __init__(
        self, config: RunConfig, grid: LagrangianGrid, g: np.ndarray, time: float
    ):
        self.config = config
        self.grid = grid
        self.g = np.asarray(g, dtype=float)
        self.time = time
        self.eulerian = reconstruct_eulerian(grid, self.g)

    @property
    def total_mass(self) -> float:
        return self.grid.total_mass

    def g_nodes(self) -> np.ndarray:
        """Reference g at ω_0..ω_N."""
        return node_values(self.g, self.grid.n_cells)

    def g_at(self, omega, total_mass: float | None = None) -> np.ndarray:
        """Reference g at labels from a grid of mass total_mass, rescaled to M_ref."""
        omega = np.asarray(omega, dtype=float)
        if total_mass is not None:
            omega = omega * (self.total_mass / total_mass)
            omega = np.clip(omega, 0.0, self.total_mass)
        return evaluate(self.grid, self.g, omega)

    def u_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.eulerian.x_nodes, self.eulerian.u_values)

    def save(self, directory: Union[str, Path]) -> None:
        """Write (x, u) and (ω, g) as two-column text."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        np.savetxt(
            directory / "reference_u.txt",
            np.column_stack([self.eulerian.x_nodes, self.eulerian.u_values]),
            fmt="%.17g",
        )
        np.savetxt(
            directory / "reference_g.txt",
            np.column_stack([self.grid.omega, self.g_nodes()]),
            fmt="%.17g",
        )


def reference_flow(config: RunConfig) -> ReferenceSnapshot:
    """Run a flow to its end time and keep the final state."""
    service = FlowService(config)
    last = None
    for last in service.iterate():
        pass
    logger.info(
        f"Reference flow N={config.n_cells}, tau={config.tau:g} reached t={last.time:g}"
    )
    return ReferenceSnapshot(config, service.grid, last.g, last.time)
