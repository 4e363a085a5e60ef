from .experiment import (
    ComparisonRecord,
    ExperimentConfig,
    ExperimentResult,
    compare_algorithms,
    load_experiment_config,
    replicate,
    run_experiment,
)
from .report import emit_convergence_plot, emit_table, format_sci
from .stats import Comparison, ConvergenceTrace, RunStatistics, compare_statistics, compute_statistics

__all__ = [
    "Comparison",
    "ComparisonRecord",
    "ConvergenceTrace",
    "ExperimentConfig",
    "ExperimentResult",
    "RunStatistics",
    "compare_algorithms",
    "compare_statistics",
    "compute_statistics",
    "emit_convergence_plot",
    "emit_table",
    "format_sci",
    "load_experiment_config",
    "replicate",
    "run_experiment",
]
