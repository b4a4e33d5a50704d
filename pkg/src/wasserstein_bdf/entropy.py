"""Discrete entropy S_N[g] = 1/(α(α-1)) ∫_0^M g^{1-α} dω and its derivatives."""

import logging
from typing import Dict, Tuple

import numpy as np

from .basis import (
    cell_weights,
    gauss_unit,
    scatter_matrix,
    scatter_vector,
    shape_functions,
)
from .lagrangian import check_positive
from .models import LagrangianGrid

logger = logging.getLogger(__name__)

# ∫ N_r N_q over the reference cell, the per-cell mass matrix of ½∫g²
CELL_MASS = np.array(
    [
        [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0],
        [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0],
        [1.0 / 3.0, 1.0 / 3.0, 8.0 / 15.0],
    ]
)

DEFAULT_ORDER = 8
CHECK_ORDER = 12
CHECK_TOL = 1e-10


class EntropyModel:
    """Power entropy with exponent α < 0.

    For α = -1 the entropy is ½∫g², evaluated with exact per-cell
    polynomials and a constant Hessian. Other exponents integrate g^{1-α}
    with Gauss-Legendre rules, exact when 1 - α is an integer.
    """

    def __init__(self, alpha: float, order: int | None = None):
        if not alpha < 0.0:
            raise ValueError(f"alpha must be negative, got {alpha}")
        self.alpha = float(alpha)
        self.order = order if order is not None else self.default_order(self.alpha)
        self.nodes, self.weights = gauss_unit(self.order)
        self.shapes = shape_functions(self.nodes)
        self._hessian_cache: Dict[bytes, np.ndarray] = {}
        self._self_checked = False

    @staticmethod
    def default_order(alpha: float) -> int:
        power = 1.0 - alpha
        if float(power).is_integer():
            return int(power) + 1
        return DEFAULT_ORDER

    @property
    def is_quadratic(self) -> bool:
        return self.alpha == -1.0

    @property
    def prefactor(self) -> float:
        return 1.0 / (self.alpha * (self.alpha - 1.0))

    @property
    def exact(self) -> bool:
        return float(1.0 - self.alpha).is_integer()

    def _values(self, grid: LagrangianGrid, g: np.ndarray) -> np.ndarray:
        """g at the quadrature nodes of every cell, shape (N, order)."""
        return cell_weights(grid, g) @ self.shapes.T

    def value(self, grid: LagrangianGrid, g: np.ndarray) -> float:
        check_positive(grid, g)
        if self.is_quadratic:
            local = cell_weights(grid, g)
            quad = np.einsum("cr,rs,cs->c", local, CELL_MASS, local)
            return float(0.5 * grid.delta @ quad)
        if not self.exact and not self._self_checked:
            self.self_check(grid, g)
        vals = self._values(grid, g) ** (1.0 - self.alpha)
        return float(self.prefactor * grid.delta @ (vals @ self.weights))

    def gradient(self, grid: LagrangianGrid, g: np.ndarray) -> np.ndarray:
        check_positive(grid, g)
        if self.is_quadratic:
            local = grid.delta[:, None] * (cell_weights(grid, g) @ CELL_MASS)
            return scatter_vector(grid, local)
        vals = self._values(grid, g) ** (-self.alpha)
        local = (-1.0 / self.alpha) * grid.delta[:, None] * (
            (vals * self.weights) @ self.shapes
        )
        return scatter_vector(grid, local)

    def hessian(self, grid: LagrangianGrid, g: np.ndarray) -> np.ndarray:
        if self.is_quadratic:
            key = grid.omega.tobytes()
            if key not in self._hessian_cache:
                local = grid.delta[:, None, None] * CELL_MASS[None, :, :]
                self._hessian_cache[key] = scatter_matrix(grid, local)
            return self._hessian_cache[key]
        check_positive(grid, g)
        vals = self._values(grid, g) ** (-1.0 - self.alpha)
        local = grid.delta[:, None, None] * np.einsum(
            "ci,i,ir,is->crs", vals, self.weights, self.shapes, self.shapes
        )
        return scatter_matrix(grid, local)

    def self_check(self, grid: LagrangianGrid, g: np.ndarray) -> Tuple[float, float]:
        """Compare the entropy at the working order with a finer rule."""
        fine = EntropyModel(self.alpha, order=CHECK_ORDER)
        fine._self_checked = True
        self._self_checked = True
        coarse_value = self.value(grid, g)
        fine_value = fine.value(grid, g)
        if abs(coarse_value - fine_value) > CHECK_TOL * max(1.0, abs(fine_value)):
            logger.warning(
                f"Entropy quadrature order {self.order} differs from order "
                f"{CHECK_ORDER} by {abs(coarse_value - fine_value):.3e}"
            )
        return coarse_value, fine_value


def entropy(model: EntropyModel, grid: LagrangianGrid, g: np.ndarray) -> float:
    return model.value(grid, g)


def entropy_gradient(
    model: EntropyModel, grid: LagrangianGrid, g: np.ndarray
) -> np.ndarray:
    return model.gradient(grid, g)


def entropy_hessian(
    model: EntropyModel, grid: LagrangianGrid, g: np.ndarray
) -> np.ndarray:
    return model.hessian(grid, g)
