"""Tests for subcommand handlers."""

import numpy as np
import pandas as pd
import pytest

from wasserstein_bdf.errors import StudyError
from wasserstein_bdf.handlers import (
    DecayStudyHandler,
    RunFlowHandler,
    SpatialStudyHandler,
)
from wasserstein_bdf.handlers.check import check_series
from wasserstein_bdf.models import RunConfig
from wasserstein_bdf.studies import (
    DecayRow,
    DecaySweepResult,
    SpatialRow,
    SpatialStudyResult,
)


def _series(entropy, gnorm=None):
    n = len(entropy)
    return pd.DataFrame(
        {
            "entropy_rel": entropy,
            "gnorm_sq_rel": gnorm if gnorm is not None else entropy,
            "mass_error": np.zeros(n),
            "min_g": np.ones(n),
        }
    )


def test_check_series_passes_decay_to_saturation():
    """Test that wiggles below the floor are ignored."""
    entropy = [1.0, 0.5, 0.1, 1e-6, 2e-6, 1e-6]
    assert check_series(_series(entropy), tol=1e-8, floor=1e-5, scheme="bdf2") == []


def test_check_series_failures():
    """Test each diagnostics invariant."""
    rising = check_series(_series([1.0, 0.5, 0.6, 0.1]), 1e-8, 1e-5, "euler")
    assert rising == ["entropy_rel increases at step 2"]

    series = _series([1.0, 0.5, 0.2, 0.1])
    series.loc[2, "mass_error"] = 1e-5
    series.loc[3, "min_g"] = 0.0
    failures = check_series(series, 1e-8, 1e-5, "euler")
    assert any("mass error" in f for f in failures)
    assert "g lost positivity" in failures

    negative = check_series(_series([1.0, 0.5, -1e-3]), 1e-8, 1e-5, "euler")
    assert any("below" in f for f in negative)


def test_check_series_gnorm_only_for_bdf2():
    """Test that the G-norm is checked from step 1 for BDF-2 runs."""
    series = _series([1.0, 0.5, 0.2, 0.1], gnorm=[0.1, 1.0, 1.2, 0.3])
    assert check_series(series, 1e-8, 1e-5, "euler") == []
    failures = check_series(series, 1e-8, 1e-5, "bdf2")
    assert failures == ["gnorm_sq_rel increases at step 2"]


def _rows(values, rates):
    return [
        DecayRow(
            value=v,
            total_mass=0.51,
            rates={"entropy_rel": r},
            residuals={"entropy_rel": 0.0},
        )
        for v, r in zip(values, rates)
    ]


def test_decay_ordering():
    """Test the rate ordering claims per swept parameter."""

    def ordering(parameter, values, rates):
        sweep = DecaySweepResult(parameter=parameter, rows=_rows(values, rates))
        return DecayStudyHandler._ordering(sweep)

    assert ordering("alpha", [-1.0, -2.0], [11.0, 14.0]) == []
    assert ordering("alpha", [-1.0, -2.0], [14.0, 11.0])
    assert ordering("tau", [2e-5, 1e-5], [12.0, 11.0]) == []
    assert ordering("n_cells", [50, 100], [11.0, None])


def test_decay_ordering_along_n_cells():
    """Test that rates must fall with N and the gaps must shrink."""

    def ordering(rates):
        sweep = DecaySweepResult(parameter="n_cells", rows=_rows([200, 50, 100], rates))
        return DecayStudyHandler._ordering(sweep)

    assert ordering([1216.62, 1244.94, 1222.36]) == []
    assert "not decreasing" in ordering([1244.94, 1216.62, 1222.36])[0]
    assert "do not settle" in ordering([1190.0, 1244.94, 1222.36])[0]


def test_study_handler_rejects_other_kind():
    """Test that a handler only accepts presets of its own kind."""
    with pytest.raises(StudyError, match="decay study"):
        SpatialStudyHandler().run({"preset": "decay-grid"})


def test_run_flow_handler_summary(tmp_path):
    """Test the summary of a short stationary run."""
    config = RunConfig(
        alpha=-1.0,
        n_cells=6,
        tau=1e-3,
        t_end=5e-3,
        initial="const",
        output_dir=str(tmp_path),
    )
    summary = RunFlowHandler().run({"config": config})
    assert summary.status == "ok"
    assert summary.steps == 5
    assert summary.t_final == pytest.approx(5e-3)
    assert summary.total_mass == pytest.approx(1.0)
    assert summary.max_mass_error <= 1e-12
    assert summary.max_newton_iterations == 1
    assert all(fit is None for fit in summary.fits.values())
    assert (tmp_path / "snapshot_0000005.csv").exists()
    assert not (tmp_path / "trajectories.csv").exists()


def test_run_flow_handler_dumps_matrix_into_fresh_dir(tmp_path):
    """Test that the matrix dump creates a missing output directory."""
    out = tmp_path / "fresh" / "run"
    config = RunConfig(
        alpha=-1.0,
        n_cells=6,
        tau=1e-3,
        t_end=2e-3,
        initial="const",
        output_dir=str(out),
        dump_matrix=True,
    )
    summary = RunFlowHandler().run({"config": config})
    assert summary.status == "ok"
    assert np.loadtxt(out / "wasserstein_matrix.txt").shape == (12, 12)
    assert (out / "series.csv").exists()


def test_reference_gap():
    """Test that a coarser reference must beat the coarsest member."""

    def result(gap_g, gap_u):
        return SpatialStudyResult(
            rows=[
                SpatialRow(n_cells=n, error_g=n**-2.0, error_u=n**-2.0)
                for n in (25, 50, 100)
            ],
            reference=RunConfig(alpha=-1.0, t_end=0.004),
            reference_gap=SpatialRow(n_cells=300, error_g=gap_g, error_u=gap_u),
        )

    assert SpatialStudyHandler._reference_gap(result(1e-5, 1e-5)) == []
    failures = SpatialStudyHandler._reference_gap(result(1e-5, 0.01))
    assert len(failures) == 1
    assert "error_u" in failures[0]
    no_gap = result(0.0, 0.0).model_copy(update={"reference_gap": None})
    assert SpatialStudyHandler._reference_gap(no_gap) == []
