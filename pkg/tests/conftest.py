"""Test configuration and fixtures."""

from pathlib import Path

import numpy as np
import pytest

from wasserstein_bdf.basis import mass
from wasserstein_bdf.models import LagrangianGrid


def symmetric_grid(
    rng: np.random.Generator, n: int, total_mass: float = 1.0
) -> LagrangianGrid:
    """Random grid with ω_{N-i} = M - ω_i."""
    half = rng.uniform(0.5, 1.5, size=(n + 1) // 2)
    widths = np.concatenate([half, half[: n // 2][::-1]])
    widths *= total_mass / widths.sum()
    omega = np.concatenate([[0.0], np.cumsum(widths)])
    omega[-1] = total_mass
    return LagrangianGrid(omega=omega)


def symmetric_weights(
    rng: np.random.Generator, grid: LagrangianGrid, spread: float = 0.3
) -> np.ndarray:
    """Random positive point-symmetric weights with unit mass."""
    n = grid.n_cells
    h = rng.uniform(1.0 - spread, 1.0 + spread, size=n + 1)
    nodes = 0.5 * (h + h[::-1])
    r = rng.uniform(-0.1, 0.1, size=n)
    quad = 0.5 * (r + r[::-1]) * (1.0 - spread)
    g = np.concatenate([nodes[1:], quad])
    return g / mass(grid, g)


def reflect(g: np.ndarray) -> np.ndarray:
    """Weights of g(M - ω) on a point-symmetric grid."""
    n = g.size // 2
    lin = np.concatenate([g[: n - 1][::-1], g[n - 1 : n]])
    return np.concatenate([lin, g[n:][::-1]])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def uniform_grid() -> LagrangianGrid:
    """M = 1, N = 4."""
    return LagrangianGrid(omega=np.linspace(0.0, 1.0, 5))


@pytest.fixture
def write_config(tmp_path: Path):
    """Write a key = value config file and return its path."""

    def _write(name: str = "run.cfg", **values) -> Path:
        values.setdefault("output_dir", str(tmp_path / "out"))
        path = tmp_path / name
        text = "".join(f"{k} = {v}\n" for k, v in values.items())
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def make_grid(rng):
    """Factory for random point-symmetric grids."""
    return lambda n, total_mass=1.0: symmetric_grid(rng, n, total_mass)


@pytest.fixture
def make_weights(rng):
    """Factory for random symmetric unit-mass weights on a grid."""
    return lambda grid, spread=0.3: symmetric_weights(rng, grid, spread)


@pytest.fixture
def reflection():
    return reflect
