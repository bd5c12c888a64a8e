"""File operations utilities.

Every artifact is written atomically (temporary file then rename) so a
crashed run never leaves a half-written checkpoint or log behind. Floats
are formatted with Python's shortest round-trip ``repr`` so identical runs
produce byte-identical files.
"""

import csv
import io
import json
import os
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from errors import LoadError


def format_value(value: Any) -> str:
    """Deterministic text form of a CSV cell."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def read_bytes(path: Path) -> bytes:
    """Read a whole file; a missing or unreadable file is a ``LoadError``."""
    try:
        return path.read_bytes()
    except OSError as err:
        msg = f"cannot read {path}: {err.strerror or err}"
        raise LoadError(msg) from err


def write_bytes_atomic(path: Path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temporary file and a rename.

    Args:
        path: Destination file
        data: Raw content
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        Path(tmp_name).replace(path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def write_text(path: Path, content: str, encoding: str = "utf-8") -> None:
    """Atomically write text to a file.

    Args:
        path: Path to the file to write
        content: Text content to write
        encoding: File encoding (default: utf-8)
    """
    write_bytes_atomic(path, content.encode(encoding))


def write_json(
    path: Path,
    data: Any,
    indent: int = 4,
    *,
    ensure_ascii: bool = False,
    **kwargs: Any,
) -> None:
    """Atomically write JSON data to a file.

    Args:
        path: Path to the file to write
        data: Data to serialize as JSON
        indent: JSON indentation (default: 4)
        ensure_ascii: Whether to escape non-ASCII characters (default: False)
        **kwargs: Additional arguments to pass to json.dumps
    """
    text = json.dumps(data, indent=indent, ensure_ascii=ensure_ascii, **kwargs)
    write_text(path, text + "\n")


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    """Atomically write a CSV table with a header row.

    Args:
        path: Path to the file to write
        header: Column names
        rows: Row values, formatted with ``format_value``

    Returns:
        The written path.
    """
    write_text(path, render_csv(header, rows))
    return path
