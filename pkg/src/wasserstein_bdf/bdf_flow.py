"""BDF-k minimizing movement objective.

One step of the k-step scheme minimizes

    Ψ(g) = -1/(2τ) Σ_{ℓ<k} a_ℓ W²(g, g^{n+ℓ}) + S_N[g]

over the mass constraint, where g^{n}, ..., g^{n+k-1} is the history
(oldest first).
"""

from typing import Sequence

import numpy as np

from .basis import MatrixLike, matrix_entries, wasserstein_sq
from .entropy import EntropyModel
from .errors import HistoryLengthMismatchError, UnsupportedOrderError
from .models import BdfScheme, LagrangianGrid

_COEFFICIENTS = {
    1: [-1.0, 1.0],
    2: [0.5, -2.0, 1.5],
}


def bdf_coefficients(k: int) -> BdfScheme:
    """Coefficient table for BDF-1 (implicit Euler) and BDF-2."""
    if k not in _COEFFICIENTS:
        raise UnsupportedOrderError(f"BDF order {k} is not supported")
    return BdfScheme(k=k, a=_COEFFICIENTS[k])


def _check_history(scheme: BdfScheme, history: Sequence[np.ndarray]) -> None:
    if len(history) != scheme.k:
        raise HistoryLengthMismatchError(
            f"BDF-{scheme.k} needs {scheme.k} history entries, got {len(history)}"
        )


def objective(
    scheme: BdfScheme,
    tau: float,
    Mw: MatrixLike,
    model: EntropyModel,
    grid: LagrangianGrid,
    history: Sequence[np.ndarray],
    g: np.ndarray,
) -> float:
    _check_history(scheme, history)
    movement = sum(
        a * wasserstein_sq(Mw, g, past) for a, past in zip(scheme.a[:-1], history)
    )
    return -movement / (2.0 * tau) + model.value(grid, g)


def objective_gradient(
    scheme: BdfScheme,
    tau: float,
    Mw: MatrixLike,
    model: EntropyModel,
    grid: LagrangianGrid,
    history: Sequence[np.ndarray],
    g: np.ndarray,
) -> np.ndarray:
    _check_history(scheme, history)
    g = np.asarray(g, dtype=float)
    combined = sum(a * (g - past) for a, past in zip(scheme.a[:-1], history))
    return -(matrix_entries(Mw) @ combined) / tau + model.gradient(grid, g)


def objective_hessian(
    scheme: BdfScheme,
    tau: float,
    Mw: MatrixLike,
    model: EntropyModel,
    grid: LagrangianGrid,
    history: Sequence[np.ndarray],
    g: np.ndarray,
) -> np.ndarray:
    """(a_k/τ) M_w + Hess S_N."""
    _check_history(scheme, history)
    return (scheme.leading / tau) * matrix_entries(Mw) + model.hessian(grid, g)
