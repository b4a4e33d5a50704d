"""Newton iteration on the KKT conditions of one BDF step.

The Lagrangian L(g, λ) = Ψ(g) - λ(1 - c·g) has the residual

    G = (∇Ψ(g) + λc, c·g - 1)

and the Newton system [[Hess Ψ, c], [cᵀ, 0]] (δg, δλ) = -G.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .basis import MatrixLike, mass_coefficients, matrix_entries
from .bdf_flow import objective_gradient, objective_hessian
from .entropy import EntropyModel
from .errors import (
    DimensionMismatchError,
    NonPositiveGError,
    NoConvergenceError,
    PositivityLossError,
    SingularKktError,
)
from .lagrangian import check_positive
from .models import BdfScheme, KktSystem, LagrangianGrid, NewtonReport

logger = logging.getLogger(__name__)


def kkt_residual(
    scheme: BdfScheme,
    tau: float,
    Mw: MatrixLike,
    model: EntropyModel,
    grid: LagrangianGrid,
    history: Sequence[np.ndarray],
    g: np.ndarray,
    lam: float,
    c: Optional[np.ndarray] = None,
) -> np.ndarray:
    """G(g, λ) with the constraint row last."""
    if c is None:
        c = mass_coefficients(grid)
    grad = objective_gradient(scheme, tau, Mw, model, grid, history, g)
    return np.concatenate([grad + lam * c, [c @ g - 1.0]])


def kkt_assemble(
    scheme: BdfScheme,
    tau: float,
    Mw: MatrixLike,
    model: EntropyModel,
    grid: LagrangianGrid,
    history: Sequence[np.ndarray],
    g: np.ndarray,
    lam: float = 0.0,
) -> KktSystem:
    """Assemble the saddle-point matrix and right-hand side -G."""
    g = np.asarray(g, dtype=float)
    dim = 2 * grid.n_cells
    if g.shape != (dim,) or matrix_entries(Mw).shape != (dim, dim):
        raise DimensionMismatchError(
            f"weights {g.shape} and matrix {matrix_entries(Mw).shape} "
            f"do not match N={grid.n_cells}"
        )
    c = mass_coefficients(grid)
    matrix = np.zeros((dim + 1, dim + 1))
    matrix[:dim, :dim] = objective_hessian(scheme, tau, Mw, model, grid, history, g)
    matrix[:dim, dim] = c
    matrix[dim, :dim] = c
    rhs = -kkt_residual(scheme, tau, Mw, model, grid, history, g, lam, c)
    return KktSystem(matrix=matrix, rhs=rhs)


def relative_update(step: np.ndarray, g: np.ndarray) -> float:
    """‖δg‖∞ / max(1, ‖g‖∞) with g the iterate before the step."""
    return float(np.max(np.abs(step)) / max(1.0, np.max(np.abs(g))))


class KktSolver:
    """Constrained Newton solver for one flow.

    For α = -1 the KKT matrix does not depend on the iterate, so it is
    factorized once and reused for every step of the run.
    """

    def __init__(
        self,
        scheme: BdfScheme,
        tau: float,
        Mw: MatrixLike,
        model: EntropyModel,
        grid: LagrangianGrid,
        tol: float = 1e-8,
        max_iter: int = 50,
    ):
        self.scheme = scheme
        self.tau = tau
        self.Mw = matrix_entries(Mw)
        self.model = model
        self.grid = grid
        self.tol = tol
        self.max_iter = max_iter
        self.c = mass_coefficients(grid)
        self._factor: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def _solve(self, system: KktSystem) -> np.ndarray:
        try:
            if self.model.is_quadratic:
                if self._factor is None:
                    self._factor = scipy.linalg.lu_factor(
                        system.matrix, check_finite=True
                    )
                    if np.any(np.diag(self._factor[0]) == 0.0):
                        self._factor = None
                        raise SingularKktError("KKT matrix has a zero pivot")
                    logger.debug("Cached constant KKT factorization")
                step = scipy.linalg.lu_solve(self._factor, system.rhs)
            else:
                step = scipy.linalg.solve(system.matrix, system.rhs, assume_a="sym")
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise SingularKktError(f"KKT factorization failed: {e}") from e
        if not np.all(np.isfinite(step)):
            raise SingularKktError("KKT solve produced non-finite values")
        return step

    def solve_step(
        self, history: Sequence[np.ndarray]
    ) -> Tuple[np.ndarray, float, NewtonReport]:
        """Minimize the BDF objective from the warm start history[-1], λ = 0."""
        dim = 2 * self.grid.n_cells
        g = np.array(history[-1], dtype=float)
        lam = 0.0
        residual = np.inf
        update = np.inf
        args = (self.scheme, self.tau, self.Mw, self.model, self.grid, history)
        try:
            for iteration in range(1, self.max_iter + 1):
                system = kkt_assemble(*args, g, lam)
                step = self._solve(system)
                update = relative_update(step[:dim], g)
                g = g + step[:dim]
                lam += step[dim]
                residual = float(
                    np.linalg.norm(kkt_residual(*args, g, lam, self.c))
                )
                logger.debug(
                    f"Newton {iteration}: |G|={residual:.3e}, update={update:.3e}"
                )
                if residual <= self.tol and update <= self.tol:
                    check_positive(self.grid, g)
                    report = NewtonReport(
                        iterations=iteration,
                        residual_norm=residual,
                        update_norm=update,
                        converged=True,
                    )
                    return g, lam, report
        except NonPositiveGError as e:
            raise PositivityLossError(f"Newton iterate lost positivity: {e}") from e
        raise NoConvergenceError(
            f"Newton did not converge in {self.max_iter} iterations "
            f"(|G|={residual:.3e}, update={update:.3e})"
        )


def solve_step(
    scheme: BdfScheme,
    tau: float,
    Mw: MatrixLike,
    model: EntropyModel,
    grid: LagrangianGrid,
    history: Sequence[np.ndarray],
    tol: float = 1e-8,
    max_iter: int = 50,
) -> Tuple[np.ndarray, float, NewtonReport]:
    return KktSolver(scheme, tau, Mw, model, grid, tol, max_iter).solve_step(history)
