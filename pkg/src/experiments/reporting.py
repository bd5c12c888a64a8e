"""Metric tables: rich console rendering plus CSV/JSON artifacts."""

import logging
from pathlib import Path

from rich.console import Console
from rich.table import Table

from models.results import ExperimentReport, MethodMetrics
from utils.file_operations import write_csv, write_json

logger = logging.getLogger(__name__)

_FIELDS = ("nat", "pgd", "cw")


def _cell(row: MethodMetrics, column: str) -> str:
    value = getattr(row, column)
    if value is None:
        return "-"
    if row.seeds > 1:
        return f"{value:.2f} ± {getattr(row, f'{column}_std'):.2f}"
    return f"{value:.2f}"


def report_table(report: ExperimentReport) -> Table:
    table = Table(title=f"{report.name} (accuracy %)")
    table.add_column("method", style="bold")
    for column in report.metric_columns:
        table.add_column(column, justify="right")
    for row in report.methods:
        table.add_row(row.method, *(_cell(row, c) for c in _FIELDS))
    return table


def print_report(
    report: ExperimentReport, console: Console | None = None
) -> None:
    (console or Console()).print(report_table(report))


def write_report(
    report: ExperimentReport, out_dir: Path
) -> ExperimentReport:
    """Write ``<name>.csv`` and ``<name>.json``; returns the report with
    its artifact paths filled in.
    """
    csv_path = out_dir / f"{report.name}.csv"
    json_path = out_dir / f"{report.name}.json"
    columns = report.metric_columns
    header = ["method", *columns, *(f"{c}_std" for c in columns), "seeds"]
    write_csv(
        csv_path,
        header,
        (
            [
                row.method,
                *(getattr(row, f) for f in _FIELDS),
                *(getattr(row, f"{f}_std") for f in _FIELDS),
                row.seeds,
            ]
            for row in report.methods
        ),
    )
    done = report.model_copy(
        update={
            "artifacts": [*report.artifacts, str(csv_path), str(json_path)]
        }
    )
    write_json(json_path, done.model_dump(mode="json"))
    logger.info("Wrote %s table to %s", report.name, csv_path)
    return done
