"""Tests for the command-line interface."""

import json

import pandas as pd
import pytest
from click.testing import CliRunner

from wasserstein_bdf.cli import cli
from wasserstein_bdf.errors import NoConvergenceError
from wasserstein_bdf.models import RunConfig
from wasserstein_bdf.studies import (
    DecayRow,
    DecaySweepResult,
    SpatialRow,
    SpatialStudyResult,
)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def const_run(write_config):
    """Config of a short stationary flow with snapshots and particles."""
    return write_config(
        alpha=-1.0,
        n_cells=8,
        tau=1e-3,
        t_end=0.01,
        initial="const",
        snapshot_every=5,
        particles=4,
        dump_matrix="true",
    )


def test_run_writes_artifacts(runner, const_run, tmp_path):
    """Test a successful run and its artifact set."""
    result = runner.invoke(cli, ["run", str(const_run)])
    assert result.exit_code == 0, result.output
    out = tmp_path / "out"
    for name in [
        "series.csv",
        "summary.json",
        "trajectories.csv",
        "trajectories_labels.csv",
        "wasserstein_matrix.txt",
        "snapshot_0000000.csv",
        "snapshot_0000005.csv",
        "snapshot_0000010.csv",
    ]:
        assert (out / name).exists(), name
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "ok"
    assert summary["steps"] == 10
    assert summary["theoretical_rate"] == pytest.approx(3.0)
    assert len(pd.read_csv(out / "series.csv")) == 11
    columns = list(pd.read_csv(out / "trajectories.csv").columns)
    assert columns == ["t", "x_1", "x_2", "x_3", "x_4"]


def test_run_is_deterministic(runner, const_run, tmp_path):
    """Test that identical configs give byte-identical tables."""
    for name in ("a", "b"):
        result = runner.invoke(cli, ["run", str(const_run), "-o", str(tmp_path / name)])
        assert result.exit_code == 0, result.output
    for table in ("series.csv", "snapshot_0000010.csv", "trajectories.csv"):
        first = (tmp_path / "a" / table).read_bytes()
        assert first == (tmp_path / "b" / table).read_bytes()


def test_run_config_errors(runner, write_config, tmp_path):
    """Test exit code 1 for invalid or missing configurations."""
    bad = write_config(alpha=-1.0, t_end=0.01, colour="red")
    result = runner.invoke(cli, ["run", str(bad)])
    assert result.exit_code == 1
    assert "configuration error" in result.output

    result = runner.invoke(cli, ["run", str(tmp_path / "missing.cfg")])
    assert result.exit_code == 1

    asymmetric = tmp_path / "datum.txt"
    asymmetric.write_text("0 1\n0.25 2\n0.5 1\n0.75 1\n1 1\n")
    config = write_config(alpha=-1.0, t_end=0.01, n_cells=4, initial=str(asymmetric))
    result = runner.invoke(cli, ["run", str(config)])
    assert result.exit_code == 1


def test_run_solver_failure(runner, const_run, tmp_path, mocker):
    """Test exit code 2 and the flushed state after a Newton failure."""
    mocker.patch(
        "wasserstein_bdf.kkt_solver.KktSolver.solve_step",
        side_effect=NoConvergenceError("stuck"),
    )
    result = runner.invoke(cli, ["run", str(const_run)])
    assert result.exit_code == 2
    out = tmp_path / "out"
    summary = json.loads((out / "summary.json").read_text())
    assert summary["status"] == "failed"
    assert "stuck" in summary["message"]
    assert (out / "snapshot_0000000.csv").exists()
    assert len(pd.read_csv(out / "series.csv")) == 1


def test_check(runner, const_run, tmp_path):
    """Test re-validation of a finished run."""
    assert runner.invoke(cli, ["run", str(const_run)]).exit_code == 0
    out = tmp_path / "out"
    result = runner.invoke(cli, ["check", str(out)])
    assert result.exit_code == 0, result.output

    series = pd.read_csv(out / "series.csv")
    series.loc[3, "mass_error"] = 1e-3
    series.to_csv(out / "series.csv", index=False)
    result = runner.invoke(cli, ["check", str(out)])
    assert result.exit_code == 3
    assert "mass error" in result.output

    assert runner.invoke(cli, ["check", str(tmp_path / "nowhere")]).exit_code == 1


def test_emit_plots(runner, const_run, tmp_path):
    """Test gnuplot script emission."""
    assert runner.invoke(cli, ["run", str(const_run)]).exit_code == 0
    result = runner.invoke(cli, ["emit-plots", str(tmp_path / "out")])
    assert result.exit_code == 0
    assert (tmp_path / "out" / "entropy.gp").exists()
    assert (tmp_path / "out" / "trajectories.gp").exists()
    assert "snapshot_0000005.csv" in (tmp_path / "out" / "snapshots.gp").read_text()

    empty = tmp_path / "empty"
    empty.mkdir()
    assert runner.invoke(cli, ["emit-plots", str(empty)]).exit_code == 1


def _sweep(rates):
    rows = [
        DecayRow(
            value=n,
            total_mass=0.51,
            rates={"entropy_rel": r},
            residuals={"entropy_rel": 0.01},
        )
        for n, r in zip([50, 100, 200], rates)
    ]
    return DecaySweepResult(parameter="n_cells", rows=rows)


def test_study_decay_check(runner, tmp_path, mocker):
    """Test the ordering check of a decay sweep."""
    sweep = mocker.patch(
        "wasserstein_bdf.handlers.study.decay_sweep",
        return_value=_sweep([1244.94, 1222.36, 1216.62]),
    )
    result = runner.invoke(cli, ["study-decay", "-o", str(tmp_path), "--check"])
    assert result.exit_code == 0, result.output
    assert sweep.call_args.args[1] == "n_cells"
    assert (tmp_path / "study_decay_n_cells.csv").exists()
    assert (tmp_path / "study_decay_n_cells.json").exists()

    sweep.return_value = _sweep([1216.62, 1222.36, 1244.94])
    result = runner.invoke(cli, ["study-decay", "-o", str(tmp_path), "--check"])
    assert result.exit_code == 3
    assert runner.invoke(cli, ["study-decay", "-o", str(tmp_path)]).exit_code == 0


def test_study_space_check(runner, tmp_path, mocker):
    """Test the slope band of the spatial study."""
    result_model = SpatialStudyResult(
        rows=[
            SpatialRow(n_cells=n, error_g=n**-2.0, error_u=n**-1.0)
            for n in (25, 50, 100)
        ],
        slope_g=-2.0,
        slope_u=-1.0,
        reference=RunConfig(alpha=-1.0, t_end=0.004),
    )
    mocker.patch(
        "wasserstein_bdf.handlers.study.spatial_convergence_study",
        return_value=result_model,
    )
    result = runner.invoke(cli, ["study-space", "-o", str(tmp_path), "--check"])
    assert result.exit_code == 3
    assert "slope_u" in result.output


def test_unknown_preset(runner):
    """Test that presets are restricted to the study kind."""
    result = runner.invoke(cli, ["study-time", "--preset", "decay-grid"])
    assert result.exit_code == 2
    assert "Invalid value" in result.output
