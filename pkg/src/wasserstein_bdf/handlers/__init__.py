"""Handlers for wasserstein-bdf subcommands."""

from .check import CheckHandler
from .emit_plots import EmitPlotsHandler
from .run_flow import RunFlowHandler
from .study import DecayStudyHandler, SpatialStudyHandler, TemporalStudyHandler

__all__ = [
    "CheckHandler",
    "DecayStudyHandler",
    "EmitPlotsHandler",
    "RunFlowHandler",
    "SpatialStudyHandler",
    "TemporalStudyHandler",
]
