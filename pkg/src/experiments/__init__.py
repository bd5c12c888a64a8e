"""Experiments package: evaluation, measurements and ablations."""

from .ablation import (
    ablation_suite,
    assignment_table,
    compare,
    generation_table,
    margin_table,
    run_seeds,
)
from .evaluation import aggregate, eval_robustness, robust_accuracy
from .measurements import (
    lps_histogram,
    path_dependence_demo,
    pm_vs_lps_boxplot,
    write_boxplot_csv,
    write_histogram_csv,
)
from .reporting import print_report, report_table, write_report

__all__ = [
    "ablation_suite",
    "aggregate",
    "assignment_table",
    "compare",
    "eval_robustness",
    "generation_table",
    "lps_histogram",
    "margin_table",
    "path_dependence_demo",
    "pm_vs_lps_boxplot",
    "print_report",
    "report_table",
    "robust_accuracy",
    "run_seeds",
    "write_boxplot_csv",
    "write_histogram_csv",
    "write_report",
]
