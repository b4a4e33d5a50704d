"""Per-step observables and exponential decay fits."""

import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from .basis import MatrixLike, mass, matrix_entries
from .entropy import EntropyModel
from .errors import (
    DimensionMismatchError,
    EmptyWindowError,
    NonPositiveValuesError,
    OutOfValidityRangeError,
)
from .lagrangian import check_positive, min_g, node_values, reconstruct_eulerian
from .models import DecayFit, DiagnosticsRecord, LagrangianGrid, NewtonReport

logger = logging.getLogger(__name__)

# fraction of steps dropped at the start of the auto window
TRANSIENT_FRACTION = 0.05


def g_norm_sq(Mw: MatrixLike, p: np.ndarray, q: np.ndarray) -> float:
    """BDF-2 G-norm (5/2)pᵀMp - 2pᵀMq + (1/2)qᵀMq."""
    entries = matrix_entries(Mw)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or entries.shape != (p.size, p.size):
        raise DimensionMismatchError(
            f"matrix {entries.shape} incompatible with vectors {p.shape}, {q.shape}"
        )
    mp = entries @ p
    return float(2.5 * p @ mp - 2.0 * q @ mp + 0.5 * q @ entries @ q)


def discrete_variance(values, widths, mean: float) -> float:
    """sqrt(Σ (v_i - mean)² w_i)."""
    values = np.asarray(values, dtype=float)
    widths = np.asarray(widths, dtype=float)
    return float(np.sqrt(np.sum((values - mean) ** 2 * widths)))


def variance_u(grid: LagrangianGrid, g: np.ndarray) -> float:
    """Spread of u over the moving cells, left-endpoint values, mean M."""
    samples = reconstruct_eulerian(grid, g)
    return discrete_variance(
        samples.u_values[:-1], np.diff(samples.x_nodes), grid.total_mass
    )


def variance_g(grid: LagrangianGrid, g: np.ndarray) -> float:
    """Spread of g over the ω-cells, left-endpoint values, mean 1/M."""
    check_positive(grid, g)
    nodes = node_values(g, grid.n_cells)
    return discrete_variance(nodes[:-1], grid.delta, 1.0 / grid.total_mass)


def theoretical_rate(alpha: float, l1_mass: float) -> float:
    """Exponential decay rate 2(1 - 2α)/((1 - α) m^{1-α}), valid for -1 ≤ α < 0."""
    if not -1.0 <= alpha < 0.0:
        raise OutOfValidityRangeError(
            f"decay rate formula needs -1 <= alpha < 0, got {alpha}"
        )
    if not l1_mass > 0.0:
        raise ValueError(f"mass must be positive, got {l1_mass}")
    return 2.0 * (1.0 - 2.0 * alpha) / ((1.0 - alpha) * l1_mass ** (1.0 - alpha))


def make_record(
    step: int,
    time: float,
    grid: LagrangianGrid,
    Mw: MatrixLike,
    model: EntropyModel,
    g: np.ndarray,
    g_prev: np.ndarray,
    g_inf: np.ndarray,
    entropy_inf: float,
    report: Optional[NewtonReport] = None,
) -> DiagnosticsRecord:
    """Observables of an accepted state; g_prev is the previous state."""
    return DiagnosticsRecord(
        step=step,
        time=time,
        entropy_rel=model.value(grid, g) - entropy_inf,
        gnorm_sq_rel=g_norm_sq(Mw, g - g_inf, g_prev - g_inf),
        var_u=variance_u(grid, g),
        var_g=variance_g(grid, g),
        mass_error=mass(grid, g) - 1.0,
        newton_iterations=report.iterations if report else 0,
        residual_norm=report.residual_norm if report else 0.0,
        min_g=min_g(grid, g),
    )


def auto_window(
    times: Sequence[float], values: Sequence[float], floor: float
) -> Tuple[float, float]:
    """Window from the end of the start-up transient to saturation.

    Saturation is the first value below floor after the transient.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 2:
        raise EmptyWindowError("series holds fewer than two samples")
    start = int(np.ceil(TRANSIENT_FRACTION * (times.size - 1)))
    below = np.nonzero(values[start:] < floor)[0]
    stop = start + int(below[0]) - 1 if below.size else times.size - 1
    if stop - start < 1:
        edge = times[min(start + 1, times.size - 1)]
        raise EmptyWindowError(
            f"series saturates below {floor:.3e} before t={edge:.6g}"
        )
    return float(times[start]), float(times[stop])


def fit_decay_rate(
    times: Sequence[float],
    values: Sequence[float],
    window: Optional[Tuple[float, float]] = None,
) -> DecayFit:
    """Least-squares fit of log(value) against t over the window."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        keep = (times >= window[0]) & (times <= window[1])
        times, values = times[keep], values[keep]
    if times.size < 2:
        raise EmptyWindowError(f"fit window {window} holds {times.size} samples")
    if np.any(values <= 0.0):
        raise NonPositiveValuesError("log fit needs strictly positive values")

    logs = np.log(values)
    fit = linregress(times, logs)
    misfit = logs - (fit.intercept + fit.slope * times)
    residual = float(np.sqrt(np.mean(misfit**2)))
    mid = min(times.size // 2, times.size - 2)
    quotient = -(logs[mid + 1] - logs[mid]) / (times[mid + 1] - times[mid])
    return DecayFit(
        t_start=float(times[0]),
        t_end=float(times[-1]),
        rate=-float(fit.slope),
        residual=residual,
        difference_quotient=float(quotient),
        n_points=int(times.size),
    )


OBSERVABLES = ("entropy_rel", "gnorm_sq_rel", "var_u", "var_g")


def fit_observables(
    records: Sequence[DiagnosticsRecord],
    floor: float,
    window: Optional[Tuple[Optional[float], Optional[float]]] = None,
) -> Dict[str, Optional[DecayFit]]:
    """Decay fits of every observable over a common window.

    Unset window ends come from the auto window of the relative entropy.
    An observable whose window cannot be fitted maps to None.
    """
    times = np.array([r.time for r in records])
    start, end = window if window is not None else (None, None)
    if start is None or end is None:
        try:
            auto_start, auto_end = auto_window(
                times, [r.entropy_rel for r in records], floor
            )
        except EmptyWindowError as e:
            logger.warning(f"No decay window: {e}")
            return {name: None for name in OBSERVABLES}
        start = auto_start if start is None else start
        end = auto_end if end is None else end

    fits: Dict[str, Optional[DecayFit]] = {}
    for name in OBSERVABLES:
        values = [getattr(r, name) for r in records]
        try:
            fits[name] = fit_decay_rate(times, values, (start, end))
        except (EmptyWindowError, NonPositiveValuesError) as e:
            logger.warning(f"Cannot fit {name}: {e}")
            fits[name] = None
    return fits
