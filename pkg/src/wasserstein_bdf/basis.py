"""Piecewise linear plus quadratic bump basis and the Wasserstein matrix.

Each cell c = [ω_c, ω_{c+1}] carries three local shape functions of the
reference coordinate s ∈ [0, 1]: the left hat 1 - s, the right hat s and the
bump 4s(1 - s). The global hat for node ω_N = M wraps onto the first cell.

The squared distance between two Lagrangian densities is the quadratic form

    W² = ∫∫ (M - max{η, η'}) h(η) h(η') dη dη',  h = g - g*,

whose matrix M_w is assembled cell pair by cell pair.
"""

import logging
from pathlib import Path
from typing import Literal, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DimensionMismatchError, IndexOutOfRangeError, LabelOutOfRangeError
from .models import LagrangianGrid, WassersteinMatrix

logger = logging.getLogger(__name__)

# ∫ N_r(s) ds and ∫ s N_r(s) ds over the reference cell
MU0 = np.array([1.0 / 2.0, 1.0 / 2.0, 2.0 / 3.0])
MU1 = np.array([1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0])

# ½ ∫∫ |s - s'| N_r(s) N_q(s') ds ds'
SPREAD_REF = np.array(
    [
        [1.0 / 30.0, 1.0 / 20.0, 1.0 / 20.0],
        [1.0 / 20.0, 1.0 / 30.0, 1.0 / 20.0],
        [1.0 / 20.0, 1.0 / 20.0, 2.0 / 35.0],
    ]
)

# Degree 6 in the collapsed triangle coordinate needs four points; five is the
# smallest rule shared by every block.
GAUSS_POINTS = 5

MatrixLike = Union[WassersteinMatrix, np.ndarray]


def gauss_unit(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def shape_functions(s) -> np.ndarray:
    """Local shapes (1 - s, s, 4s(1 - s)) stacked on the last axis."""
    s = np.asarray(s, dtype=float)
    return np.stack([1.0 - s, s, 4.0 * s * (1.0 - s)], axis=-1)


def cell_weights(grid: LagrangianGrid, g: np.ndarray) -> np.ndarray:
    """Local weights (left node, right node, bump) per cell, shape (N, 3)."""
    return np.asarray(g, dtype=float)[grid.dofs]


def scatter_vector(grid: LagrangianGrid, local: np.ndarray) -> np.ndarray:
    out = np.zeros(2 * grid.n_cells)
    np.add.at(out, grid.dofs, local)
    return out


def scatter_matrix(grid: LagrangianGrid, local: np.ndarray) -> np.ndarray:
    """Sum per-cell 3×3 blocks into a dense 2N×2N matrix."""
    dofs = grid.dofs
    out = np.zeros((2 * grid.n_cells, 2 * grid.n_cells))
    np.add.at(out, (dofs[:, :, None], dofs[:, None, :]), local)
    return out


def locate(grid: LagrangianGrid, omega) -> tuple[np.ndarray, np.ndarray]:
    """Cell index and reference coordinate of mass labels ω ∈ [0, M]."""
    omega = np.asarray(omega, dtype=float)
    m = grid.total_mass
    if np.any(omega < 0.0) or np.any(omega > m):
        raise LabelOutOfRangeError(f"labels must lie in [0, {m}]")
    cell = np.searchsorted(grid.omega, omega, side="right") - 1
    cell = np.clip(cell, 0, grid.n_cells - 1)
    s = (omega - grid.omega[cell]) / grid.delta[cell]
    return cell, s


def eval_basis(grid: LagrangianGrid, j: int, omega) -> np.ndarray:
    """Value of basis function φ_j (1-based, 1..2N) at ω."""
    n = grid.n_cells
    if not 1 <= j <= 2 * n:
        raise IndexOutOfRangeError(f"basis index {j} outside 1..{2 * n}")
    cell, s = locate(grid, omega)
    mask = grid.dofs[cell] == j - 1
    return np.sum(np.where(mask, shape_functions(s), 0.0), axis=-1)


def evaluate(grid: LagrangianGrid, g: np.ndarray, omega) -> np.ndarray:
    """Value of g = Σ g_j φ_j at ω."""
    cell, s = locate(grid, omega)
    return np.sum(cell_weights(grid, g)[cell] * shape_functions(s), axis=-1)


def mass_coefficients(grid: LagrangianGrid) -> np.ndarray:
    """Coefficients c with c·g = ∫_0^M g dω."""
    d = grid.delta
    return np.concatenate([0.5 * (d + np.roll(d, -1)), 2.0 * d / 3.0])


def mass(grid: LagrangianGrid, g: np.ndarray) -> float:
    return float(mass_coefficients(grid) @ np.asarray(g, dtype=float))


def steady_state(grid: LagrangianGrid) -> np.ndarray:
    """Weights of the constant density g_∞ = 1/M."""
    n = grid.n_cells
    return np.concatenate([np.full(n, 1.0 / grid.total_mass), np.zeros(n)])


def _assemble_blocks(
    grid: LagrangianGrid, first: np.ndarray, moment: np.ndarray, diagonal: np.ndarray
) -> WassersteinMatrix:
    """Scatter the cell-pair blocks of the kernel M - max{η, η'}.

    For cells p < q every η in p lies below every η' in q, so the block
    factorizes into first[p] ⊗ (M·first[q] - moment[q]).
    """
    n = grid.n_cells
    tail = grid.total_mass * first - moment
    p = np.arange(n)
    lower = (p[:, None] < p[None, :])[:, None, :, None]
    upper = (p[:, None] > p[None, :])[:, None, :, None]
    blocks = np.where(lower, first[:, :, None, None] * tail[None, None, :, :], 0.0)
    blocks += np.where(upper, tail[:, :, None, None] * first[None, None, :, :], 0.0)
    blocks[p, :, p, :] = diagonal

    dofs = grid.dofs
    entries = np.zeros((2 * n, 2 * n))
    np.add.at(entries, (dofs[:, :, None, None], dofs[None, None, :, :]), blocks)
    return WassersteinMatrix(entries=0.5 * (entries + entries.T))


def basis_moments(grid: LagrangianGrid) -> tuple[np.ndarray, np.ndarray]:
    """Zeroth and first moments ∫φ_j dω and ∫ω φ_j dω of every basis function.

    A hat has mass Δ_j and centroid σ_j. The hat of ω_N = M keeps its falling
    half on the first cell, which shifts its first moment by -M·δ_1/2.
    """
    d = grid.delta
    w = grid.omega
    hat_first = grid.Delta * grid.sigma
    hat_first[-1] -= 0.5 * grid.total_mass * d[0]
    zeroth = np.concatenate([grid.Delta, 2.0 * d / 3.0])
    first = np.concatenate([hat_first, (w[1:] ** 2 - w[:-1] ** 2) / 3.0])
    return zeroth, first


def spread_matrix(grid: LagrangianGrid) -> np.ndarray:
    """Gram matrix of the kernel |η - η'|/2.

    Inside a cell the block is δ³ times SPREAD_REF. For cells p < q every η
    in p lies below every η' in q, so the block is a difference of moment
    products.
    """
    n = grid.n_cells
    d = grid.delta
    left = grid.omega[:-1]
    first = d[:, None] * MU0[None, :]
    moment = (left * d)[:, None] * MU0[None, :] + (d**2)[:, None] * MU1[None, :]
    p = np.arange(n)
    sign = np.sign(p[None, :] - p[:, None])[:, None, :, None]
    cross = (
        first[:, :, None, None] * moment[None, None, :, :]
        - moment[:, :, None, None] * first[None, None, :, :]
    )
    blocks = 0.5 * sign * cross
    blocks[p, :, p, :] = (d**3)[:, None, None] * SPREAD_REF[None, :, :]

    dofs = grid.dofs
    out = np.zeros((2 * n, 2 * n))
    np.add.at(out, (dofs[:, :, None, None], dofs[None, None, :, :]), blocks)
    return 0.5 * (out + out.T)


def assemble_closed_form(grid: LagrangianGrid) -> WassersteinMatrix:
    """Assemble M_w from basis moments.

    With max{η, η'} = (η + η')/2 + |η - η'|/2 the form splits into

        M_w = M·F Fᵀ - (F Gᵀ + G Fᵀ)/2 - K,

    F and G the zeroth and first moments and K the spread matrix. On an
    interior hat this is Δ_j²(M - σ_j) - (Δ_j/60)(12Δ_j² + δ_j² + δ_{j+1}²).
    """
    zeroth, first = basis_moments(grid)
    entries = (
        grid.total_mass * np.outer(zeroth, zeroth)
        - 0.5 * (np.outer(zeroth, first) + np.outer(first, zeroth))
        - spread_matrix(grid)
    )
    return WassersteinMatrix(entries=0.5 * (entries + entries.T))


def assemble_quadrature(grid: LagrangianGrid) -> WassersteinMatrix:
    """Assemble M_w by Gauss quadrature, splitting diagonal cells along η = η'.

    Each diagonal block is integrated over the two triangles s' < s and
    s < s' with the collapsed coordinates (u, uv), Jacobian u.
    """
    d = grid.delta
    left = grid.omega[:-1]
    m = grid.total_mass
    x, w = gauss_unit(GAUSS_POINTS)
    shapes = shape_functions(x)

    first = d[:, None] * (w @ shapes)[None, :]
    eta = left[:, None] + d[:, None] * x[None, :]
    moment = d[:, None] * np.einsum("i,ci,ir->cr", w, eta, shapes)

    inner = shape_functions(x[:, None] * x[None, :])
    kernel = m - eta
    weight = np.outer(w, w) * x[:, None]
    tri = np.einsum("ik,ir,iks->irs", weight, shapes, inner)
    tri = tri + tri.transpose(0, 2, 1)
    diagonal = (d**2)[:, None, None] * np.einsum("ci,irs->crs", kernel, tri)
    return _assemble_blocks(grid, first, moment, diagonal)


def assemble(
    grid: LagrangianGrid, method: Literal["quadrature", "closed_form"] = "quadrature"
) -> WassersteinMatrix:
    if method == "closed_form":
        return assemble_closed_form(grid)
    return assemble_quadrature(grid)


def matrix_entries(Mw: MatrixLike) -> np.ndarray:
    return Mw.entries if isinstance(Mw, WassersteinMatrix) else np.asarray(Mw)


def wasserstein_sq(Mw: MatrixLike, g: np.ndarray, g_star: np.ndarray) -> float:
    """Squared Wasserstein distance (g - g*)ᵀ M_w (g - g*)."""
    entries = matrix_entries(Mw)
    g = np.asarray(g, dtype=float)
    g_star = np.asarray(g_star, dtype=float)
    if g.shape != g_star.shape or entries.shape != (g.size, g.size):
        raise DimensionMismatchError(
            f"matrix {entries.shape} incompatible with vectors {g.shape}, {g_star.shape}"
        )
    diff = g - g_star
    return float(diff @ entries @ diff)


def dump_matrix(Mw: MatrixLike, path: Union[str, Path]) -> None:
    """Write M_w row-major with full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, matrix_entries(Mw), fmt="%.17g")
    logger.debug(f"Wrote Wasserstein matrix to {path}")
