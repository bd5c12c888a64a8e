"""Per-epoch training log as CSV."""

from collections.abc import Sequence
from pathlib import Path

from models.results import EpochRecord
from utils.file_operations import write_csv

LOG_COLUMNS = tuple(EpochRecord.model_fields)


def write_train_log(path: Path, history: Sequence[EpochRecord]) -> Path:
    rows = ([getattr(record, c) for c in LOG_COLUMNS] for record in history)
    return write_csv(path, LOG_COLUMNS, rows)
