"""Command-line interface for the Wasserstein BDF solver."""

import logging
from pathlib import Path
from typing import Any, Callable, Optional

import click
from pydantic import ValidationError

from .config import load_config
from .errors import FlowError, SolverError
from .handlers import (
    CheckHandler,
    DecayStudyHandler,
    EmitPlotsHandler,
    RunFlowHandler,
    SpatialStudyHandler,
    TemporalStudyHandler,
)
from .studies import STUDY_PRESETS
from .version import __version__

logger = logging.getLogger("wasserstein-bdf")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_CHECK = 3


def _execute(action: Callable[[], Any]) -> Any:
    """Run an action, exiting with the code of its failure class."""
    try:
        return action()
    except SolverError as e:
        click.echo(f"solver failure: {e}", err=True)
        raise SystemExit(EXIT_SOLVER) from e
    except (FlowError, ValidationError) as e:
        click.echo(f"configuration error: {e}", err=True)
        raise SystemExit(EXIT_CONFIG) from e


def _report(report) -> None:
    if report.passed:
        click.echo("check passed")
        return
    for failure in report.failures:
        click.echo(f"FAILED: {failure}", err=True)
    raise SystemExit(EXIT_CHECK)


def _presets(kind: str) -> list[str]:
    return sorted(name for name, p in STUDY_PRESETS.items() if p.kind == kind)


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log Newton iterations")
@click.version_option(__version__, prog_name="wasserstein-bdf")
def cli(verbose: bool) -> None:
    """BDF-k Wasserstein gradient flow for 1D super-fast diffusion."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@cli.command()
@click.argument("config_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option(
    "--output-dir", "-o", type=click.Path(path_type=Path), help="Artifact directory"
)
def run(config_file: Path, output_dir: Optional[Path]) -> None:
    """Run the flow described by CONFIG_FILE."""

    def action():
        override = str(output_dir) if output_dir else None
        config = load_config(config_file, output_dir=override)
        return RunFlowHandler().run({"config": config})

    summary = _execute(action)
    click.echo(f"{summary.status}: {summary.steps} steps to t={summary.t_final:g}")


def _study_command(name: str, handler_cls, kind: str, default: str, help_text: str):
    @cli.command(name=name, help=help_text)
    @click.option(
        "--preset",
        type=click.Choice(_presets(kind)),
        default=default,
        show_default=True,
    )
    @click.option("--scheme", type=click.Choice(["euler", "bdf2"]), default=None)
    @click.option("--workers", "-j", type=int, default=1, show_default=True)
    @click.option(
        "--output-dir", "-o", type=click.Path(path_type=Path), default=Path(".")
    )
    @click.option(
        "--check/--no-check", default=False, help="Exit 3 when the expected order fails"
    )
    def command(
        preset: str, scheme: Optional[str], workers: int, output_dir: Path, check: bool
    ):
        arguments = {
            "preset": preset,
            "scheme": scheme,
            "workers": workers,
            "output_dir": str(output_dir),
        }
        result, report = _execute(lambda: handler_cls().run(arguments))
        click.echo(result.model_dump_json(indent=2))
        if check:
            _report(report)

    return command


study_space = _study_command(
    "study-space",
    SpatialStudyHandler,
    "space",
    "space-desk",
    "Spatial convergence study.",
)
study_time = _study_command(
    "study-time",
    TemporalStudyHandler,
    "time",
    "time-desk",
    "Temporal convergence study.",
)
study_decay = _study_command(
    "study-decay", DecayStudyHandler, "decay", "decay-grid", "Decay-rate sweep."
)


@cli.command()
@click.argument("run_dir", type=click.Path(file_okay=False, path_type=Path))
def check(run_dir: Path) -> None:
    """Re-validate series.csv in RUN_DIR."""
    _report(_execute(lambda: CheckHandler().run({"run_dir": run_dir})))


@cli.command(name="emit-plots")
@click.argument("run_dir", type=click.Path(file_okay=False, path_type=Path))
def emit_plots(run_dir: Path) -> None:
    """Write gnuplot scripts for RUN_DIR."""
    for path in _execute(lambda: EmitPlotsHandler().run({"run_dir": run_dir})):
        click.echo(str(path))
