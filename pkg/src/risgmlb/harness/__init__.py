"""Experiment orchestration: sweeps, traces, cost tables, CSV output and the CLI."""

from risgmlb.harness.config import ALGORITHMS, RunConfig, load_config
from risgmlb.harness.runners import (
    SweepResult,
    run_cost_comparison,
    run_epoch_trace,
    run_gradient_check,
    run_ris_sweep,
    run_snr_sweep,
)

__all__ = [
    "ALGORITHMS",
    "RunConfig",
    "SweepResult",
    "load_config",
    "run_cost_comparison",
    "run_epoch_trace",
    "run_gradient_check",
    "run_ris_sweep",
    "run_snr_sweep",
]
