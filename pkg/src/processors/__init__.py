"""Processors package: margins, instance weights and training objectives."""

from .margins import (
    MarginScores,
    lps,
    measure,
    mm,
    mm_adv,
    pm,
    pm_adv,
    pm_dif,
    pm_nat,
    write_margin_csv,
)
from .objectives import (
    BatchLossReport,
    baseline_loss,
    mail_at_loss,
    mail_mart_loss,
    mail_trades_loss,
    objective_loss,
    standard_loss,
)
from .reweighting import (
    WeightStats,
    WeightVector,
    assign_unnormalized,
    effective_weights,
    normalize,
    pooled_stats,
)

__all__ = [
    "BatchLossReport",
    "MarginScores",
    "WeightStats",
    "WeightVector",
    "assign_unnormalized",
    "baseline_loss",
    "effective_weights",
    "lps",
    "mail_at_loss",
    "mail_mart_loss",
    "mail_trades_loss",
    "measure",
    "mm",
    "mm_adv",
    "normalize",
    "objective_loss",
    "pm",
    "pm_adv",
    "pm_dif",
    "pm_nat",
    "pooled_stats",
    "standard_loss",
    "write_margin_csv",
]
