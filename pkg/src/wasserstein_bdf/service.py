"""Time stepping of one Wasserstein BDF flow."""

import logging
import time
from typing import Iterator, List, Optional

import numpy as np

from .basis import assemble, steady_state
from .bdf_flow import bdf_coefficients
from .diagnostics import make_record
from .entropy import EntropyModel
from .kkt_solver import KktSolver
from .lagrangian import build_initial, initial_samples
from .models import DiagnosticsRecord, EulerianSamples, FlowState, FlowStep, RunConfig

logger = logging.getLogger(__name__)


class FlowService:
    """Runs the minimizing movement scheme configured by a RunConfig.

    The first step of a multistep scheme is taken with implicit Euler at the
    same time step.
    """

    def __init__(self, config: RunConfig, samples: Optional[EulerianSamples] = None):
        self.config = config
        if samples is None:
            samples = initial_samples(config.initial, config.n_cells)
        self.samples = samples
        self.grid, initial = build_initial(self.samples)
        self.g0 = initial.to_array()
        self.Mw = assemble(self.grid, config.assembler)
        self.model = EntropyModel(config.alpha)
        self.g_inf = steady_state(self.grid)
        self.entropy_inf = self.model.value(self.grid, self.g_inf)
        self.scheme = bdf_coefficients(config.order)
        self.solver = self._solver(self.scheme.k)
        self.bootstrap = self._solver(1) if self.scheme.k > 1 else self.solver

    def _solver(self, k: int) -> KktSolver:
        return KktSolver(
            bdf_coefficients(k),
            self.config.tau,
            self.Mw,
            self.model,
            self.grid,
            tol=self.config.newton_tol,
            max_iter=self.config.newton_max_iter,
        )

    def _flow_step(
        self, state: FlowState, previous: np.ndarray, report=None
    ) -> FlowStep:
        record = make_record(
            state.step,
            state.time,
            self.grid,
            self.Mw,
            self.model,
            state.current,
            previous,
            self.g_inf,
            self.entropy_inf,
            report,
        )
        return FlowStep(
            step=state.step,
            time=state.time,
            g=state.current,
            multiplier=state.multiplier,
            report=report,
            record=record,
        )

    def iterate(self) -> Iterator[FlowStep]:
        """Yield the initial state and every accepted step up to t_end."""
        config = self.config
        logger.info(
            f"Flow alpha={config.alpha:g}, N={config.n_cells}, tau={config.tau:g}, "
            f"scheme={config.scheme}, steps={config.n_steps}, "
            f"M={self.grid.total_mass:.10g}"
        )
        started = time.perf_counter()
        state = FlowState(history=[self.g0])
        yield self._flow_step(state, self.g0)

        for n in range(1, config.n_steps + 1):
            warm = len(state.history) == self.scheme.k
            solver = self.solver if warm else self.bootstrap
            g, lam, report = solver.solve_step(state.history)
            previous = state.current
            state.push(g, self.scheme.k)
            state.step = n
            state.time = n * config.tau
            state.multiplier = lam
            if report.iterations > config.newton_max_iter // 2:
                logger.warning(
                    f"Step {n}: Newton needed {report.iterations} iterations"
                )
            logger.debug(
                f"Step {n}: t={state.time:.6g}, iterations={report.iterations}"
            )
            yield self._flow_step(state, previous, report)

        logger.info(f"Flow finished in {time.perf_counter() - started:.2f}s")

    def records(self) -> List[DiagnosticsRecord]:
        return [step.record for step in self.iterate()]
