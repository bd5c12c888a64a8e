"""Utilities package: atomic file output and random streams."""

from .file_operations import (
    format_value,
    read_bytes,
    render_csv,
    write_bytes_atomic,
    write_csv,
    write_json,
    write_text,
)
from .rng import stream, uniform_box

__all__ = [
    "format_value",
    "read_bytes",
    "render_csv",
    "stream",
    "uniform_box",
    "write_bytes_atomic",
    "write_csv",
    "write_json",
    "write_text",
]
