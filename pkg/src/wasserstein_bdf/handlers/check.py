"""Handler for re-validating the artifacts of a finished run."""

import json
import logging
import traceback
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from ..artifacts import SERIES_FILE, SUMMARY_FILE, read_series
from ..errors import ConfigError
from ..models import RunConfig
from .base import BaseHandler, CheckReport

logger = logging.getLogger("wasserstein-bdf")

DEFAULT_TOL = 1e-8


def _monotone_failures(
    name: str, values: np.ndarray, floor: float, slack: float, start: int = 0
) -> List[str]:
    """Non-increasing from start until the first value below floor."""
    values = values[start:]
    below = np.nonzero(values < floor)[0]
    stop = int(below[0]) if below.size else values.size
    rises = np.nonzero(np.diff(values[: stop + 1]) > slack)[0]
    if rises.size:
        return [f"{name} increases at step {start + int(rises[0]) + 1}"]
    return []


def check_series(
    series: pd.DataFrame, tol: float, floor: float, scheme: str
) -> List[str]:
    """Diagnostics invariants of a series table."""
    slack = 10.0 * tol
    failures = []
    mass_error = np.abs(series["mass_error"].to_numpy())
    if np.any(mass_error > slack):
        failures.append(f"mass error {mass_error.max():.3e} exceeds {slack:.1e}")
    entropy = series["entropy_rel"].to_numpy()
    if np.any(entropy < -slack):
        failures.append(f"relative entropy {entropy.min():.3e} below {-slack:.1e}")
    if np.any(series["min_g"].to_numpy() <= 0.0):
        failures.append("g lost positivity")
    failures += _monotone_failures("entropy_rel", entropy, floor, slack)
    if scheme == "bdf2":
        # step 0 pairs the initial state with itself
        failures += _monotone_failures(
            "gnorm_sq_rel", series["gnorm_sq_rel"].to_numpy(), floor, slack, start=1
        )
    return failures


class CheckHandler(BaseHandler):
    """Handler for checking series.csv of a run directory."""

    name = "check"
    description = "Re-validate mass, positivity and monotone decay of a run's series."

    def run(self, arguments: Dict[str, Any]) -> CheckReport:
        run_dir = Path(arguments["run_dir"])
        series_path = run_dir / SERIES_FILE
        if not series_path.exists():
            raise ConfigError(f"No {SERIES_FILE} in {run_dir}")
        try:
            tol, floor, scheme = DEFAULT_TOL, 1e3 * DEFAULT_TOL, "bdf2"
            summary_path = run_dir / SUMMARY_FILE
            if summary_path.exists():
                summary = json.loads(summary_path.read_text(encoding="utf-8"))
                config = RunConfig(**summary["config"])
                tol, floor, scheme = config.newton_tol, config.floor, config.scheme
            failures = check_series(read_series(series_path), tol, floor, scheme)
        except Exception as e:
            logger.error(f"Error checking {run_dir}: {str(e)}")
            logger.error(traceback.format_exc())
            raise
        for failure in failures:
            logger.warning(f"Check failed: {failure}")
        return CheckReport.from_failures(failures)
