"""Handler for running a single flow."""

import logging
import traceback
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ..artifacts import (
    MATRIX_FILE,
    SERIES_FILE,
    SUMMARY_FILE,
    TRAJECTORIES_FILE,
    snapshot_name,
    write_series,
    write_snapshot,
    write_summary,
    write_trajectories,
)
from ..basis import dump_matrix
from ..diagnostics import fit_observables, theoretical_rate
from ..errors import OutOfValidityRangeError, SolverError
from ..lagrangian import default_labels, trace_particles
from ..models import FlowStep, RunConfig, RunSummary
from ..service import FlowService
from .base import BaseHandler

logger = logging.getLogger("wasserstein-bdf")


class RunFlowHandler(BaseHandler):
    """Handler for running one configured flow and writing its artifacts."""

    name = "run"
    description = (
        "Run a flow and write series.csv, snapshots, trajectories and summary.json."
    )

    def run(self, arguments: Dict[str, Any]) -> RunSummary:
        """Execute the flow; a solver failure still flushes the last good state."""
        config: RunConfig = arguments["config"]
        out = Path(config.output_dir)
        service = FlowService(config)
        grid = service.grid
        if config.dump_matrix:
            dump_matrix(service.Mw, out / MATRIX_FILE)

        records = []
        states: List[np.ndarray] = []
        times: List[float] = []
        last: Optional[FlowStep] = None
        snapshot_written = False
        failure: Optional[SolverError] = None
        try:
            for step in service.iterate():
                records.append(step.record)
                if config.particles:
                    states.append(step.g)
                    times.append(step.time)
                snapshot_written = step.step == 0 or bool(
                    config.snapshot_every and step.step % config.snapshot_every == 0
                )
                if snapshot_written:
                    write_snapshot(grid, step.g, out / snapshot_name(step.step))
                last = step
        except SolverError as e:
            logger.error(f"Flow aborted: {str(e)}")
            logger.error(traceback.format_exc())
            failure = e

        if last is not None and not snapshot_written:
            write_snapshot(grid, last.g, out / snapshot_name(last.step))
        write_series(records, out / SERIES_FILE)
        if config.particles and states:
            labels = default_labels(grid, config.particles)
            write_trajectories(
                trace_particles(grid, states, labels, times), out / TRAJECTORIES_FILE
            )

        summary = self._summary(config, service, records, failure)
        write_summary(summary, out / SUMMARY_FILE)
        if failure is not None:
            raise failure
        logger.info(f"Wrote run artifacts to {out}")
        return summary

    @staticmethod
    def _summary(
        config: RunConfig, service: FlowService, records, failure
    ) -> RunSummary:
        fits = {}
        if failure is None and len(records) > 2:
            fits = fit_observables(
                records, config.floor, (config.fit_t_start, config.fit_t_end)
            )
        try:
            reference = theoretical_rate(config.alpha, service.grid.total_mass)
        except OutOfValidityRangeError:
            reference = None
        return RunSummary(
            status="failed" if failure else "ok",
            message=str(failure) if failure else None,
            steps=records[-1].step if records else 0,
            t_final=records[-1].time if records else 0.0,
            total_mass=service.grid.total_mass,
            fits=fits,
            theoretical_rate=reference,
            max_newton_iterations=max(
                (r.newton_iterations for r in records), default=0
            ),
            max_mass_error=max((abs(r.mass_error) for r in records), default=0.0),
            config=config,
        )
