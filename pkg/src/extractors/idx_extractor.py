"""IDX image/label files (the MNIST container format), optionally gzipped.

Layout, big-endian::

    images: magic 0x00000803 | n | rows | cols | n*rows*cols unsigned bytes
    labels: magic 0x00000801 | n | n unsigned bytes
"""

import gzip
import logging
import struct
from pathlib import Path

import numpy as np

from errors import ParseError, SchemaError
from extractors.dataset import Dataset
from network.functional import Array, Labels
from utils import file_operations

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
_GZIP_MAGIC = b"\x1f\x8b"
_PIXEL_SCALE = 255.0


class IdxExtractor:
    """Reads an image file and a label file into a pixel-space dataset."""

    def __init__(self, num_classes: int = 10) -> None:
        self.num_classes = num_classes

    @staticmethod
    def read_bytes(path: Path) -> bytes:
        raw = file_operations.read_bytes(path)
        if raw[:2] == _GZIP_MAGIC:
            try:
                return gzip.decompress(raw)
            except (OSError, EOFError) as err:
                msg = f"{path.name} is a corrupt gzip stream"
                raise ParseError(msg, offset=0) from err
        return raw

    @staticmethod
    def _header(raw: bytes, magic: int, dims: int) -> tuple[int, ...]:
        fmt = f">{dims + 1}I"
        size = struct.calcsize(fmt)
        if len(raw) < size:
            msg = f"IDX header needs {size} bytes, file has {len(raw)}"
            raise ParseError(msg, offset=len(raw))
        found, *shape = struct.unpack_from(fmt, raw, 0)
        if found != magic:
            msg = f"bad IDX magic 0x{found:08x}, expected 0x{magic:08x}"
            raise ParseError(msg, offset=0)
        payload = len(raw) - size
        expected = int(np.prod(shape))
        if payload != expected:
            msg = f"IDX payload holds {payload} bytes, header says {expected}"
            raise ParseError(msg, offset=size + min(payload, expected))
        return tuple(shape)

    def parse_images(self, raw: bytes) -> Array:
        """Flattened ``(n, rows * cols)`` pixels scaled to ``[0, 1]``."""
        n, rows, cols = self._header(raw, IMAGES_MAGIC, 3)
        pixels = np.frombuffer(raw, dtype=np.uint8, offset=16)
        return pixels.reshape(n, rows * cols).astype(np.float64) / _PIXEL_SCALE

    def parse_labels(self, raw: bytes) -> Labels:
        self._header(raw, LABELS_MAGIC, 1)
        labels = np.frombuffer(raw, dtype=np.uint8, offset=8).astype(np.int64)
        bad = np.flatnonzero(labels >= self.num_classes)
        if bad.size:
            msg = f"label {labels[bad[0]]} outside [0, {self.num_classes})"
            raise SchemaError(msg, offset=8 + int(bad[0]))
        return labels

    def extract(self, images_path: Path, labels_path: Path) -> Dataset:
        inputs = self.parse_images(self.read_bytes(images_path))
        labels = self.parse_labels(self.read_bytes(labels_path))
        if inputs.shape[0] != labels.shape[0]:
            msg = (
                f"{inputs.shape[0]} images but {labels.shape[0]} labels"
            )
            raise SchemaError(msg, offset=4)
        logger.info(
            "Loaded %d images of %d pixels from %s",
            inputs.shape[0],
            inputs.shape[1],
            images_path,
        )
        return Dataset(
            inputs=inputs,
            labels=labels,
            num_classes=self.num_classes,
            domain_box=(0.0, 1.0),
            name=images_path.name.split(".")[0],
        )


def load_idx(
    images_path: Path, labels_path: Path, num_classes: int = 10
) -> Dataset:
    return IdxExtractor(num_classes).extract(images_path, labels_path)
