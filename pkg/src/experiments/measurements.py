"""LPS histogram, PM-vs-LPS box plot and the path-dependence search."""

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from attacks import lm_pgd, pgd
from extractors.dataset import Dataset
from models.config import AttackConfig, LmPgdConfig, ThreatModel
from models.results import BoxplotRow, LpsHistogramRow, PathDemoReport
from network.mlp import ModelParams
from processors.margins import lps, pm_adv, pm_nat
from utils.file_operations import write_csv

logger = logging.getLogger(__name__)

HISTOGRAM_COLUMNS = ("lps", "count", "critical_count")
BOXPLOT_COLUMNS = (
    "lps",
    "count",
    "whisker_low",
    "q1",
    "median",
    "q3",
    "whisker_high",
    "outliers",
)
WHISKER_PERCENTILES = (5.0, 95.0)


def lps_histogram(
    params: ModelParams,
    dataset: Dataset,
    attack: AttackConfig,
    threat: ThreatModel,
) -> list[LpsHistogramRow]:
    """Counts per LPS bin ``0..T`` plus how many of them have PM_adv < 0."""
    perturbation = pgd(
        params,
        dataset.inputs,
        dataset.labels,
        threat,
        attack,
        instance_ids=dataset.instance_ids,
    )
    steps = lps(perturbation).values.astype(np.int64)
    critical = (
        pm_adv(params, dataset.inputs, perturbation.delta, dataset.labels)
        .values < 0
    )
    counts = np.bincount(steps, minlength=attack.steps + 1)
    critical_counts = np.bincount(
        steps[critical], minlength=attack.steps + 1
    )
    return [
        LpsHistogramRow(
            lps=value,
            count=int(counts[value]),
            critical_count=int(critical_counts[value]),
        )
        for value in range(attack.steps + 1)
    ]


def _box(value: int, group: np.ndarray) -> BoxplotRow:
    lower, upper = WHISKER_PERCENTILES
    low, q1, median, q3, high = np.percentile(
        group, [lower, 25.0, 50.0, 75.0, upper]
    )
    outliers = group[(group < low) | (group > high)]
    return BoxplotRow(
        lps=value,
        count=int(group.size),
        whisker_low=float(low),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        whisker_high=float(high),
        outliers=sorted(float(v) for v in outliers),
    )


def pm_vs_lps_boxplot(
    params: ModelParams,
    dataset: Dataset,
    attack: AttackConfig,
    threat: ThreatModel,
) -> list[BoxplotRow]:
    """PM_nat summary per LPS group; whiskers at the 5th/95th percentiles.

    Empty groups are omitted.
    """
    perturbation = pgd(
        params,
        dataset.inputs,
        dataset.labels,
        threat,
        attack,
        instance_ids=dataset.instance_ids,
    )
    steps = lps(perturbation).values.astype(np.int64)
    margins = pm_nat(params, dataset.inputs, dataset.labels).values
    return [
        _box(int(value), margins[steps == value])
        for value in np.unique(steps)
    ]


def write_histogram_csv(path: Path, rows: Sequence[LpsHistogramRow]) -> Path:
    return write_csv(
        path,
        HISTOGRAM_COLUMNS,
        ([r.lps, r.count, r.critical_count] for r in rows),
    )


def write_boxplot_csv(path: Path, rows: Sequence[BoxplotRow]) -> Path:
    """Outliers are joined with ``;`` inside one cell."""
    return write_csv(
        path,
        BOXPLOT_COLUMNS,
        (
            [
                r.lps,
                r.count,
                r.whisker_low,
                r.q1,
                r.median,
                r.q3,
                r.whisker_high,
                ";".join(repr(v) for v in r.outliers),
            ]
            for r in rows
        ),
    )


def path_dependence_demo(
    dataset: Dataset,
    params: ModelParams,
    threat: ThreatModel,
    *,
    lm_config: LmPgdConfig | None = None,
    step_size: float = 2 / 255,
    max_steps: int = 50,
) -> PathDemoReport:
    """Find an instance where PGD never crosses but LM-PGD does.

    Both attacks start from ``delta = 0``. Among qualifying instances the
    one LM-PGD breaks fastest wins, ties going to the lowest row. Finding
    none is reported, not raised.
    """
    lm_config = lm_config or LmPgdConfig.momentum_demo()
    plain = pgd(
        params,
        dataset.inputs,
        dataset.labels,
        threat,
        AttackConfig(steps=max_steps, step_size=step_size, rand_init=False),
    )
    searched = lm_pgd(
        params, dataset.inputs, dataset.labels, threat, lm_config, max_steps
    )
    stuck = ~plain.crossed & searched.crossed
    if not np.any(stuck):
        message = (
            f"no instance among {len(dataset)} where PGD-{max_steps} "
            "stalls while LM-PGD crosses"
        )
        logger.warning(message)
        return PathDemoReport(
            found=False,
            searched=len(dataset),
            max_steps=max_steps,
            message=message,
        )

    candidates = np.flatnonzero(stuck)
    row = int(candidates[np.argmin(searched.crossed_at[candidates])])
    x = dataset.inputs[row : row + 1]
    y = dataset.labels[row : row + 1]
    pgd_pm = pm_adv(params, x, plain.delta[row : row + 1], y).values[0]
    lm_pm = pm_adv(params, x, searched.delta[row : row + 1], y).values[0]
    report = PathDemoReport(
        found=True,
        searched=len(dataset),
        max_steps=max_steps,
        instance_id=int(dataset.instance_ids[row]),
        pgd_lps=int(plain.lps()[row]),
        lm_pgd_lps=int(searched.lps()[row]),
        pgd_pm_adv=float(pgd_pm),
        lm_pgd_pm_adv=float(lm_pm),
        pgd_losses=plain.losses[row].tolist(),
        lm_pgd_losses=searched.losses[row].tolist(),
        message=f"{int(candidates.size)} qualifying instances",
    )
    logger.info(
        "Instance %d: PGD LPS %d, LM-PGD LPS %d",
        report.instance_id,
        report.pgd_lps,
        report.lm_pgd_lps,
    )
    return report
