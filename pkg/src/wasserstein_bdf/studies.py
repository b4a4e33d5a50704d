"""Convergence studies and decay-rate sweeps over families of runs."""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Literal,
    Optional,
    Sequence,
    Tuple,
    TypeVar,
    Union,
)

import numpy as np
from pydantic import BaseModel, Field
from scipy.integrate import trapezoid
from scipy.stats import linregress

from .config import build_config
from .diagnostics import fit_observables, theoretical_rate
from .errors import EmptyWindowError, OutOfValidityRangeError, StudyError
from .lagrangian import (
    build_initial,
    initial_samples,
    node_values,
    reconstruct_eulerian,
)
from .models import RunConfig
from .oracle import ReferenceSnapshot, comparison_grid, reference_flow
from .service import FlowService

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

DEGENERATE_ERROR = 1e-10
MIN_STUDY_POINTS = 3


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Map over study members, in submission order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def derive(base: RunConfig, update: Dict[str, Any]) -> RunConfig:
    """Copy of base with update applied, validated again."""
    return build_config({**base.model_dump(), **update}, "study member")


def log_slope(x: Sequence[float], errors: Sequence[float]) -> float:
    return float(linregress(np.log(x), np.log(errors)).slope)


class SpatialRow(BaseModel):
    n_cells: int
    error_g: float
    error_u: float


class SpatialStudyResult(BaseModel):
    """Final-time errors against a fine reference, per grid size."""

    rows: List[SpatialRow]
    slope_g: Optional[float] = Field(None, description="log-log slope of g errors")
    slope_u: Optional[float] = Field(None, description="log-log slope of u errors")
    degenerate: bool = False
    reference: RunConfig
    reference_gap: Optional[SpatialRow] = Field(
        None, description="errors of a coarser reference against the reference"
    )
    deviation: Optional[str] = None


class TemporalRow(BaseModel):
    tau: float
    error_g: float
    error_u: float


class TemporalStudyResult(BaseModel):
    """ℓ∞-in-time, ℓ²-in-space errors on (τ*, T], per time step."""

    rows: List[TemporalRow]
    sample_times: List[float]
    tau_star: float
    slope_g: Optional[float] = None
    slope_u: Optional[float] = None
    degenerate: bool = False
    reference: RunConfig
    deviation: Optional[str] = None


class DecayRow(BaseModel):
    value: float
    total_mass: float
    rates: Dict[str, Optional[float]]
    residuals: Dict[str, Optional[float]]
    theoretical_rate: Optional[float] = None


class DecaySweepResult(BaseModel):
    parameter: str
    rows: List[DecayRow]
    deviation: Optional[str] = None

    def rates(self, observable: str = "entropy_rel") -> List[Optional[float]]:
        return [row.rates[observable] for row in self.rows]


def _final_errors(
    ref: ReferenceSnapshot, snap: ReferenceSnapshot, x: np.ndarray
) -> Tuple[float, float]:
    """Max-norm errors of g at the reference nodes and of u on x."""
    g = snap.g_at(ref.grid.omega, ref.total_mass)
    error_g = float(np.max(np.abs(g - ref.g_nodes())))
    error_u = float(np.max(np.abs(snap.u_at(x) - ref.u_at(x))))
    return error_g, error_u


def spatial_convergence_study(
    base: RunConfig,
    n_list: Sequence[int],
    reference: RunConfig,
    workers: int = 1,
    check_reference: Optional[RunConfig] = None,
    reference_dir: Optional[Union[str, Path]] = None,
) -> SpatialStudyResult:
    """Compare final states for several N with a reference run.

    g is compared at the reference nodes, mapped onto each coarse grid by the
    ratio of discrete masses; u is compared on the fixed comparison grid.
    A check_reference run is measured against the reference the same way and
    reported as reference_gap. With reference_dir the reference state is saved.
    """
    if len(n_list) < MIN_STUDY_POINTS:
        raise StudyError(
            f"need at least {MIN_STUDY_POINTS} grid sizes to fit, got {len(n_list)}"
        )
    configs = [derive(base, {"n_cells": int(n)}) for n in n_list]
    if check_reference is not None:
        configs.append(check_reference)
    snapshots = parallel_map(reference_flow, [reference] + configs, workers)
    ref, members = snapshots[0], snapshots[1:]
    if reference_dir is not None:
        ref.save(reference_dir)

    x = comparison_grid()
    rows = []
    for n, snap in zip(n_list, members):
        error_g, error_u = _final_errors(ref, snap, x)
        logger.info(f"N={n}: error_g={error_g:.3e}, error_u={error_u:.3e}")
        rows.append(SpatialRow(n_cells=int(n), error_g=error_g, error_u=error_u))

    result = SpatialStudyResult(rows=rows, reference=reference)
    if check_reference is not None:
        error_g, error_u = _final_errors(ref, members[-1], x)
        logger.info(
            f"Reference gap N={check_reference.n_cells}: "
            f"error_g={error_g:.3e}, error_u={error_u:.3e}"
        )
        result.reference_gap = SpatialRow(
            n_cells=check_reference.n_cells, error_g=error_g, error_u=error_u
        )
    errors = [r.error_g for r in rows] + [r.error_u for r in rows]
    if max(errors) <= DEGENERATE_ERROR or min(errors) <= 0.0:
        result.degenerate = True
        return result
    result.slope_g = log_slope(n_list, [r.error_g for r in rows])
    result.slope_u = log_slope(n_list, [r.error_u for r in rows])
    return result


def sample_times(taus: Sequence[float], tau_star: float, t_end: float) -> np.ndarray:
    """Multiples of the largest τ in (τ*, T], shared by every τ in the list."""
    if tau_star >= t_end:
        raise EmptyWindowError(f"tau_star={tau_star} leaves no window before T={t_end}")
    coarse = max(taus)
    first = int(np.floor(tau_star / coarse + 1e-9)) + 1
    last = int(np.floor(t_end / coarse + 1e-9))
    times = coarse * np.arange(first, last + 1)
    if times.size == 0:
        raise EmptyWindowError(
            f"no multiple of tau={coarse} lies in ({tau_star}, {t_end}]"
        )
    for tau in taus:
        ratio = times / tau
        if np.max(np.abs(ratio - np.round(ratio))) > 1e-6:
            raise StudyError(f"tau={tau} does not divide the sample times")
    return times


def sample_flow(args: Tuple[RunConfig, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """u on the comparison grid and g at the nodes, at the given times."""
    config, times = args
    wanted = {int(round(t / config.tau)): i for i, t in enumerate(times)}
    x = comparison_grid()
    service = FlowService(config)
    u = np.full((len(times), x.size), np.nan)
    g = np.full((len(times), config.n_cells + 1), np.nan)
    for step in service.iterate():
        index = wanted.get(step.step)
        if index is None:
            continue
        samples = reconstruct_eulerian(service.grid, step.g)
        u[index] = np.interp(x, samples.x_nodes, samples.u_values)
        g[index] = node_values(step.g, config.n_cells)
    return u, g


def temporal_convergence_study(
    base: RunConfig,
    tau_list: Sequence[float],
    tau_star: float,
    reference: RunConfig,
    workers: int = 1,
) -> TemporalStudyResult:
    """Time-step convergence at fixed N, measured after the start-up transient."""
    if len(tau_list) < MIN_STUDY_POINTS:
        raise StudyError(
            f"need at least {MIN_STUDY_POINTS} time steps to fit, got {len(tau_list)}"
        )
    if reference.n_cells != base.n_cells:
        raise StudyError("reference and study runs must share N")
    times = sample_times(list(tau_list) + [reference.tau], tau_star, base.t_end)
    configs = [derive(base, {"tau": float(tau)}) for tau in tau_list]
    jobs = [(c, times) for c in [reference] + configs]
    sampled = parallel_map(sample_flow, jobs, workers)
    (u_ref, g_ref), members = sampled[0], sampled[1:]

    x = comparison_grid()
    ref_samples = initial_samples(reference.initial, reference.n_cells)
    ref_grid, _ = build_initial(ref_samples)
    omega = ref_grid.omega
    rows = []
    for tau, (u, g) in zip(tau_list, members):
        error_u = float(np.max(np.sqrt(trapezoid((u - u_ref) ** 2, x, axis=1))))
        error_g = float(np.max(np.sqrt(trapezoid((g - g_ref) ** 2, omega, axis=1))))
        logger.info(f"tau={tau:g}: error_g={error_g:.3e}, error_u={error_u:.3e}")
        rows.append(TemporalRow(tau=float(tau), error_g=error_g, error_u=error_u))

    result = TemporalStudyResult(
        rows=rows, sample_times=times.tolist(), tau_star=tau_star, reference=reference
    )
    errors = [r.error_g for r in rows] + [r.error_u for r in rows]
    if max(errors) <= DEGENERATE_ERROR or min(errors) <= 0.0:
        result.degenerate = True
        return result
    result.slope_g = log_slope(tau_list, [r.error_g for r in rows])
    result.slope_u = log_slope(tau_list, [r.error_u for r in rows])
    return result


def decay_rates(config: RunConfig) -> DecayRow:
    """Run one member of a sweep and fit all observables."""
    service = FlowService(config)
    records = service.records()
    window = (config.fit_t_start, config.fit_t_end)
    fits = fit_observables(records, config.floor, window)
    try:
        reference = theoretical_rate(config.alpha, service.grid.total_mass)
    except OutOfValidityRangeError:
        reference = None
    return DecayRow(
        value=0.0,
        total_mass=service.grid.total_mass,
        rates={name: fit.rate if fit else None for name, fit in fits.items()},
        residuals={name: fit.residual if fit else None for name, fit in fits.items()},
        theoretical_rate=reference,
    )


SWEEP_PARAMETERS = ("n_cells", "alpha", "tau")


def decay_sweep(
    template: RunConfig,
    parameter: Literal["n_cells", "alpha", "tau"],
    values: Sequence[float],
    workers: int = 1,
) -> DecaySweepResult:
    """Fitted decay rates of every observable per parameter value."""
    if parameter not in SWEEP_PARAMETERS:
        raise StudyError(f"cannot sweep over {parameter!r}")
    cast = int if parameter == "n_cells" else float
    configs = [derive(template, {parameter: cast(v)}) for v in values]
    rows = parallel_map(decay_rates, configs, workers)
    for value, row in zip(values, rows):
        row.value = float(value)
        logger.info(f"{parameter}={value:g}: entropy rate {row.rates['entropy_rel']}")
    return DecaySweepResult(parameter=parameter, rows=rows)


class StudyPreset(BaseModel):
    """Named study setup with its departure from the full-scale runs."""

    kind: Literal["space", "time", "decay"]
    parameter: Literal["n_cells", "alpha", "tau"]
    values: List[float]
    base: Dict[str, Any]
    reference: Dict[str, Any] = Field(default_factory=dict)
    reference_check: Dict[str, Any] = Field(default_factory=dict)
    tau_star: Optional[float] = None
    deviation: str

    def base_config(self, **overrides: Any) -> RunConfig:
        values = dict(self.base)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return build_config(values, "study preset")

    def reference_config(self, base: RunConfig) -> RunConfig:
        return derive(base, self.reference)

    def reference_check_config(self, base: RunConfig) -> Optional[RunConfig]:
        """Coarser reference used to judge whether the reference is resolved."""
        if not self.reference_check:
            return None
        return derive(self.reference_config(base), self.reference_check)


STUDY_PRESETS: Dict[str, StudyPreset] = {
    "space-desk": StudyPreset(
        kind="space",
        parameter="n_cells",
        values=[25, 50, 100, 200],
        base={"alpha": -1.0, "initial": "cos2_offset", "t_end": 0.004, "tau": 1e-6},
        reference={"n_cells": 400},
        reference_check={"n_cells": 300},
        deviation=(
            "study and reference runs use tau=1e-6 instead of 1e-7; "
            "reference N=400 instead of 500"
        ),
    ),
    "time-desk": StudyPreset(
        kind="time",
        parameter="tau",
        values=[4e-5, 2e-5, 1e-5, 5e-6],
        base={
            "alpha": -1.0,
            "initial": "cos2_offset",
            "n_cells": 100,
            "t_end": 0.004,
            "tau": 4e-5,
        },
        reference={"tau": 6.25e-7},
        tau_star=1e-4,
        deviation=(
            "end time T=0.004 and reference tau=6.25e-7 at N=100 "
            "chosen for desk scale"
        ),
    ),
    "decay-grid": StudyPreset(
        kind="decay",
        parameter="n_cells",
        values=[50, 100, 200],
        base={"alpha": -1.0, "initial": "cos2", "tau": 1e-5, "t_end": 0.02},
        deviation="horizon T=0.02",
    ),
    "decay-alpha": StudyPreset(
        kind="decay",
        parameter="alpha",
        values=[-1.0, -2.0],
        base={
            "alpha": -1.0,
            "initial": "cos2",
            "n_cells": 100,
            "tau": 1e-5,
            "t_end": 0.02,
        },
        deviation="horizon T=0.02",
    ),
    "decay-tau": StudyPreset(
        kind="decay",
        parameter="tau",
        values=[2e-5, 1e-5, 5e-6],
        base={
            "alpha": -1.0,
            "initial": "cos2",
            "n_cells": 100,
            "tau": 1e-5,
            "t_end": 0.02,
        },
        deviation="horizon T=0.02; rates are reported without an ordering claim",
    ),
}


def get_preset(name: str) -> StudyPreset:
    if name not in STUDY_PRESETS:
        raise StudyError(
            f"unknown study preset {name!r}; choose from {sorted(STUDY_PRESETS)}"
        )
    return STUDY_PRESETS[name]


