"""Handler for writing gnuplot scripts for a run directory."""

import logging
from pathlib import Path
from typing import Any, Dict, List

from ..artifacts import SERIES_FILE, write_gnuplot_scripts
from ..errors import ConfigError
from .base import BaseHandler

logger = logging.getLogger("wasserstein-bdf")


class EmitPlotsHandler(BaseHandler):
    """Handler for emitting gnuplot scripts next to the run's CSV files."""

    name = "emit-plots"
    description = "Write gnuplot scripts for series, snapshots and trajectories."

    def run(self, arguments: Dict[str, Any]) -> List[Path]:
        run_dir = Path(arguments["run_dir"])
        if not (run_dir / SERIES_FILE).exists():
            raise ConfigError(f"No {SERIES_FILE} in {run_dir}")
        snapshots = sorted(p.name for p in run_dir.glob("snapshot_*.csv"))
        written = write_gnuplot_scripts(run_dir, snapshots)
        logger.info(f"Wrote {len(written)} gnuplot scripts to {run_dir}")
        return written
