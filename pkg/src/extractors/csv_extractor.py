"""CSV ingestion: feature columns plus one integer label per row."""

import logging
from pathlib import Path

import numpy as np

from errors import ParseError, SchemaError
from extractors.dataset import Dataset
from models.config import CsvSchema
from utils.file_operations import read_bytes, write_csv

logger = logging.getLogger(__name__)

_MIN_CLASSES = 2


def _is_numeric(field: bytes) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


class CsvExtractor:
    """Parses CSV bytes according to a ``CsvSchema``.

    Errors report the byte offset of the offending row or field.
    """

    def __init__(self, schema: CsvSchema) -> None:
        self.schema = schema

    def _lines(self, raw: bytes) -> list[tuple[int, bytes]]:
        lines = []
        offset = 0
        for line in raw.split(b"\n"):
            stripped = line.rstrip(b"\r")
            if stripped.strip():
                lines.append((offset, stripped))
            offset += len(line) + 1
        return lines

    def _has_header(self, first: bytes) -> bool:
        if self.schema.has_header is not None:
            return self.schema.has_header
        return not all(_is_numeric(f) for f in first.split(b","))

    def _parse_row(self, offset: int, line: bytes) -> tuple[list[float], int]:
        fields = line.split(b",")
        expected = self.schema.num_features + 1
        if len(fields) != expected:
            msg = f"expected {expected} columns, found {len(fields)}"
            raise ParseError(msg, offset=offset)
        label_index = 0 if self.schema.label_position == "first" else -1
        values = []
        starts = []
        position = offset
        for field in fields:
            starts.append(position)
            try:
                values.append(float(field))
            except ValueError as err:
                msg = f"field {field!r} is not a number"
                raise ParseError(msg, offset=position) from err
            position += len(field) + 1
        label = values.pop(label_index)
        if not label.is_integer():
            msg = f"label {label!r} is not an integer"
            raise ParseError(msg, offset=starts[label_index])
        return values, int(label)

    def extract_bytes(self, raw: bytes, name: str = "") -> Dataset:
        lines = self._lines(raw)
        if lines and self._has_header(lines[0][1]):
            lines = lines[1:]
        if not lines:
            msg = "CSV holds no data rows"
            raise ParseError(msg, offset=len(raw))

        rows = [self._parse_row(offset, line) for offset, line in lines]
        inputs = np.array([features for features, _ in rows])
        labels = np.array([label for _, label in rows], dtype=np.int64)
        num_classes = self.schema.num_classes or max(
            _MIN_CLASSES, int(labels.max()) + 1
        )
        bad = np.flatnonzero((labels < 0) | (labels >= num_classes))
        if bad.size:
            first = int(bad[0])
            msg = f"label {labels[first]} outside [0, {num_classes})"
            raise SchemaError(msg, offset=lines[first][0])
        if not np.all(np.isfinite(inputs)):
            row = int(np.flatnonzero(~np.isfinite(inputs).all(axis=1))[0])
            msg = "non-finite feature value"
            raise ParseError(msg, offset=lines[row][0])
        return Dataset(
            inputs=inputs,
            labels=labels,
            num_classes=num_classes,
            domain_box=self.schema.domain_box,
            name=name,
        )

    def extract(self, path: Path) -> Dataset:
        dataset = self.extract_bytes(read_bytes(path), name=path.stem)
        logger.info(
            "Loaded %d rows x %d features from %s",
            len(dataset),
            dataset.num_features,
            path,
        )
        return dataset


def load_csv(path: Path, schema: CsvSchema) -> Dataset:
    return CsvExtractor(schema).extract(path)


def save_csv(dataset: Dataset, path: Path) -> Path:
    """Write features (shortest round-trip repr) then the label."""
    header = [f"x{i}" for i in range(dataset.num_features)] + ["label"]
    rows = (
        [float(v) for v in features] + [int(label)]
        for features, label in zip(dataset.inputs, dataset.labels, strict=True)
    )
    return write_csv(path, header, rows)
