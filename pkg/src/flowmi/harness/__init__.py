"""Experiment orchestration: configs, seeded run grids, summaries, plots."""

from .config import EstimatorSpec, ExperimentConfig, TaskSpec, build_config, load_config
from .grid import (
    RESULT_COLUMNS,
    TRACE_COLUMNS,
    RunResult,
    data_rng,
    estimator_seed,
    execute_run,
    load_results,
    oracle_rng,
    run_grid,
    trace_filename,
)
from .summary import SUMMARY_COLUMNS, format_summary, summarize, write_summary
from .plots import PlotSpec, emit_plots, parse_plot_spec

__all__ = [
    "EstimatorSpec",
    "ExperimentConfig",
    "TaskSpec",
    "build_config",
    "load_config",
    "RESULT_COLUMNS",
    "TRACE_COLUMNS",
    "RunResult",
    "data_rng",
    "estimator_seed",
    "execute_run",
    "load_results",
    "oracle_rng",
    "run_grid",
    "trace_filename",
    "SUMMARY_COLUMNS",
    "format_summary",
    "summarize",
    "write_summary",
    "PlotSpec",
    "emit_plots",
    "parse_plot_spec",
]
