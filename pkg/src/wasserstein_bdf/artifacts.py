"""Artifact writers for runs and studies.

Tables go through :mod:`pandas` with 17 significant digits so that files
re-parse to the same floats; summaries are pydantic JSON dumps. Nothing
time-dependent is written, so identical configs give identical files.
"""

from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from .lagrangian import node_values, reconstruct_eulerian
from .models import DiagnosticsRecord, LagrangianGrid, TrajectorySet

FLOAT_FORMAT = "%.17g"

SERIES_FILE = "series.csv"
TRAJECTORIES_FILE = "trajectories.csv"
SUMMARY_FILE = "summary.json"
MATRIX_FILE = "wasserstein_matrix.txt"
SNAPSHOT_COLUMNS = ["j", "omega_j", "g_lin_j", "g_quad_j", "x_j", "u_j"]


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def _write_frame(df: pd.DataFrame, path: Path) -> None:
    _ensure_parent(path)
    df.to_csv(
        path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n"
    )


def snapshot_name(step: int) -> str:
    return f"snapshot_{step:07d}.csv"


def series_frame(records: Iterable[DiagnosticsRecord]) -> pd.DataFrame:
    rows = [record.model_dump() for record in records]
    return pd.DataFrame(rows, columns=list(DiagnosticsRecord.model_fields))


def write_series(records: Iterable[DiagnosticsRecord], path: Path) -> None:
    """Write one row per step with the diagnostics header."""
    _write_frame(series_frame(records), path)


def read_table(path: Path) -> pd.DataFrame:
    """Read a table written by this module, bit-exact in every float column."""
    return pd.read_csv(path, float_precision="round_trip")


def read_series(path: Path) -> pd.DataFrame:
    return read_table(path)


def snapshot_frame(grid: LagrangianGrid, g: np.ndarray) -> pd.DataFrame:
    """Nodes j = 0..N with the bump of cell [ω_{j-1}, ω_j] on row j."""
    n = grid.n_cells
    samples = reconstruct_eulerian(grid, g)
    quad = np.concatenate([[np.nan], np.asarray(g, dtype=float)[n:]])
    return pd.DataFrame(
        {
            "j": np.arange(n + 1),
            "omega_j": grid.omega,
            "g_lin_j": node_values(g, n),
            "g_quad_j": quad,
            "x_j": samples.x_nodes,
            "u_j": samples.u_values,
        },
        columns=SNAPSHOT_COLUMNS,
    )


def write_snapshot(grid: LagrangianGrid, g: np.ndarray, path: Path) -> None:
    _write_frame(snapshot_frame(grid, g), path)


def write_trajectories(trajectories: TrajectorySet, path: Path) -> None:
    """Columns t, x_1..x_P; a second file lists the labels ω_p."""
    positions = pd.DataFrame(
        trajectories.positions,
        columns=[f"x_{p + 1}" for p in range(trajectories.labels.size)],
    )
    positions.insert(0, "t", trajectories.times)
    _write_frame(positions, path)
    count = trajectories.labels.size
    labels = pd.DataFrame(
        {"p": np.arange(1, count + 1), "omega_p": trajectories.labels}
    )
    _write_frame(labels, path.with_name(path.stem + "_labels.csv"))


def write_table(rows: Sequence[Mapping[str, Any]], path: Path) -> None:
    _write_frame(pd.DataFrame(list(rows)), path)


def write_summary(summary: BaseModel, path: Path) -> None:
    _ensure_parent(path)
    path.write_text(summary.model_dump_json(indent=2) + "\n", encoding="utf-8")


def _series_script(title: str, columns: Sequence[str], logscale: bool = True) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        "set xlabel 't'",
    ]
    if logscale:
        lines.append("set logscale y")
    plots = ", ".join(
        f"'series.csv' using 'time':(abs(column('{c}'))) with lines"
        for c in columns
    )
    lines.append(f"plot {plots}")
    return "\n".join(lines) + "\n"


def write_gnuplot_scripts(
    run_dir: Path, snapshots: Optional[Sequence[str]] = None
) -> list[Path]:
    """Write gnuplot scripts next to the CSV files of a run directory."""
    written = []
    scripts = {
        "entropy.gp": _series_script("relative entropy", ["entropy_rel"]),
        "gnorm.gp": _series_script("relative G-norm squared", ["gnorm_sq_rel"]),
        "variance.gp": _series_script("variances", ["var_u", "var_g"]),
        "mass.gp": _series_script("mass error", ["mass_error"]),
    }
    if snapshots:
        plots = ", ".join(
            f"'{name}' using 'x_j':'u_j' with lines title '{name}'"
            for name in snapshots
        )
        scripts["snapshots.gp"] = (
            "set datafile separator ','\nset xlabel 'x'\nset ylabel 'u'\n"
            f"plot {plots}\n"
        )
    if (run_dir / TRAJECTORIES_FILE).exists():
        scripts["trajectories.gp"] = (
            "set datafile separator ','\nset key off\nset xlabel 'x'\nset ylabel 't'\n"
            f"plot for [i=2:*] '{TRAJECTORIES_FILE}' using i:1 with lines\n"
        )
    for name, text in scripts.items():
        path = run_dir / name
        _ensure_parent(path)
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
