"""Handlers for the convergence studies and decay sweeps."""

import logging
import traceback
from pathlib import Path
from typing import Any, Dict, List, Tuple

from ..artifacts import write_summary, write_table
from ..errors import StudyError
from ..studies import (
    DecaySweepResult,
    SpatialStudyResult,
    TemporalStudyResult,
    decay_sweep,
    get_preset,
    spatial_convergence_study,
    temporal_convergence_study,
)
from .base import BaseHandler, CheckReport

logger = logging.getLogger("wasserstein-bdf")

SPACE_BAND = (-2.3, -1.7)
TIME_BANDS = {"bdf2": (1.7, 2.3), "euler": (0.8, 1.3)}


def _in_band(name: str, value, band: Tuple[float, float]) -> List[str]:
    if value is None or not band[0] <= value <= band[1]:
        return [f"{name}={value} outside [{band[0]}, {band[1]}]"]
    return []


class _StudyHandler(BaseHandler):
    kind = ""

    def _preset(self, arguments: Dict[str, Any]):
        preset = get_preset(arguments["preset"])
        if preset.kind != self.kind:
            raise StudyError(f"preset {arguments['preset']!r} is a {preset.kind} study")
        return preset

    def _write(self, result, arguments: Dict[str, Any], stem: str) -> None:
        out = Path(arguments.get("output_dir") or ".")
        write_table([row.model_dump() for row in result.rows], out / f"{stem}.csv")
        write_summary(result, out / f"{stem}.json")
        logger.info(f"Wrote {stem} results to {out}")

    def run(self, arguments: Dict[str, Any]) -> Tuple[Any, CheckReport]:
        try:
            return self._run(arguments)
        except Exception as e:
            logger.error(f"Error running {self.name}: {str(e)}")
            logger.error(traceback.format_exc())
            raise

    def _run(self, arguments: Dict[str, Any]) -> Tuple[Any, CheckReport]:
        raise NotImplementedError


class SpatialStudyHandler(_StudyHandler):
    """Handler for the spatial convergence study."""

    name = "study-space"
    description = "Final-time errors against a fine reference for several N."
    kind = "space"

    def _run(self, arguments: Dict[str, Any]) -> Tuple[SpatialStudyResult, CheckReport]:
        preset = self._preset(arguments)
        base = preset.base_config(scheme=arguments.get("scheme"))
        out = Path(arguments.get("output_dir") or ".")
        result = spatial_convergence_study(
            base,
            [int(v) for v in preset.values],
            preset.reference_config(base),
            workers=arguments.get("workers", 1),
            check_reference=preset.reference_check_config(base),
            reference_dir=out,
        )
        result.deviation = preset.deviation
        self._write(result, arguments, "study_space")
        failures = []
        if not result.degenerate:
            failures += _in_band("slope_g", result.slope_g, SPACE_BAND)
            failures += _in_band("slope_u", result.slope_u, SPACE_BAND)
            failures += self._reference_gap(result)
        return result, CheckReport.from_failures(failures)

    @staticmethod
    def _reference_gap(result: SpatialStudyResult) -> List[str]:
        """The coarser reference must sit closer to the reference than any member."""
        gap = result.reference_gap
        if gap is None:
            return []
        coarsest = min(result.rows, key=lambda row: row.n_cells)
        failures = []
        if gap.error_g >= coarsest.error_g:
            failures.append(
                f"reference gap error_g={gap.error_g:.3e} not below "
                f"N={coarsest.n_cells} error {coarsest.error_g:.3e}"
            )
        if gap.error_u >= coarsest.error_u:
            failures.append(
                f"reference gap error_u={gap.error_u:.3e} not below "
                f"N={coarsest.n_cells} error {coarsest.error_u:.3e}"
            )
        return failures


class TemporalStudyHandler(_StudyHandler):
    """Handler for the temporal convergence study."""

    name = "study-time"
    description = "Errors after the start-up transient for several time steps at fixed N."
    kind = "time"

    def _run(
        self, arguments: Dict[str, Any]
    ) -> Tuple[TemporalStudyResult, CheckReport]:
        preset = self._preset(arguments)
        base = preset.base_config(scheme=arguments.get("scheme"))
        result = temporal_convergence_study(
            base,
            preset.values,
            preset.tau_star,
            preset.reference_config(base),
            workers=arguments.get("workers", 1),
        )
        result.deviation = preset.deviation
        self._write(result, arguments, f"study_time_{base.scheme}")
        failures = []
        if not result.degenerate:
            failures += _in_band("slope_u", result.slope_u, TIME_BANDS[base.scheme])
        return result, CheckReport.from_failures(failures)


class DecayStudyHandler(_StudyHandler):
    """Handler for decay-rate sweeps over N, α or τ."""

    name = "study-decay"
    description = "Fitted decay rates of entropy, G-norm and variances per parameter value."
    kind = "decay"

    def _run(self, arguments: Dict[str, Any]) -> Tuple[DecaySweepResult, CheckReport]:
        preset = self._preset(arguments)
        base = preset.base_config(scheme=arguments.get("scheme"))
        result = decay_sweep(
            base, preset.parameter, preset.values, workers=arguments.get("workers", 1)
        )
        result.deviation = preset.deviation
        self._write(result, arguments, f"study_decay_{preset.parameter}")
        return result, CheckReport.from_failures(self._ordering(result))

    @staticmethod
    def _ordering(result: DecaySweepResult) -> List[str]:
        """Entropy rates grow as α decreases and settle from above as N grows.

        On refinement the rates must fall with shrinking gaps. τ sweeps carry
        no claim.
        """
        rates = result.rates("entropy_rel")
        if result.parameter == "tau":
            return []
        if any(rate is None for rate in rates):
            return [f"missing entropy rate in {rates}"]
        values = [row.value for row in result.rows]
        pairs = sorted(zip(values, rates), reverse=result.parameter == "alpha")
        ordered = [rate for _, rate in pairs]
        steps = [b - a for a, b in zip(ordered, ordered[1:])]
        if result.parameter == "alpha":
            if any(step <= 0.0 for step in steps):
                return [f"entropy rates {ordered} not increasing as alpha decreases"]
            return []
        if any(step >= 0.0 for step in steps):
            return [f"entropy rates {ordered} not decreasing along n_cells"]
        if any(abs(b) >= abs(a) for a, b in zip(steps, steps[1:])):
            return [f"entropy rates {ordered} do not settle along n_cells"]
        return []
