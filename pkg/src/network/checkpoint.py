"""Binary checkpoint format for ``ModelParams``.

Layout (all integers little-endian)::

    [0:8]    magic  b"MAILCKPT"
    [8:12]   uint32 header length H
    [12:12+H] UTF-8 JSON header: layer_dims, activation, num_classes,
             sections (name and float count, in payload order), metadata
    [12+H:]  float64 payload: parameters layer by layer (W then b),
             followed by any extra sections

A JSON sidecar next to the file repeats the header for human inspection.
"""

import json
import logging
import struct
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from errors import ConfigurationError, NumericError, ParseError, SchemaError
from network.functional import Array
from network.mlp import ModelParams
from utils.file_operations import (
    read_bytes,
    write_bytes_atomic,
    write_json,
)

logger = logging.getLogger(__name__)

MAGIC = b"MAILCKPT"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sI")
_FLOAT = np.dtype("<f8")
_REQUIRED_KEYS = ("layer_dims", "activation", "num_classes", "sections")


@dataclass(frozen=True)
class Checkpoint:
    header: dict[str, Any]
    params: ModelParams
    sections: dict[str, Array] = field(default_factory=dict)

    @property
    def metadata(self) -> dict[str, Any]:
        return self.header.get("metadata", {})


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def architecture_header(params: ModelParams) -> dict[str, Any]:
    return {
        "format": FORMAT_VERSION,
        "layer_dims": list(params.layer_dims),
        "activation": params.activation,
        "num_classes": params.num_classes,
    }


def encode_checkpoint(
    params: ModelParams,
    *,
    sections: Mapping[str, Array] | None = None,
    metadata: Mapping[str, Any] | None = None,
) -> bytes:
    """Serialize parameters plus optional extra float sections."""
    extra = dict(sections or {})
    vectors = {"params": params.flatten()}
    vectors.update(
        {
            name: np.asarray(v, dtype=np.float64).ravel()
            for name, v in extra.items()
        }
    )
    header = architecture_header(params)
    header["sections"] = [
        {"name": name, "count": int(v.size)} for name, v in vectors.items()
    ]
    header["metadata"] = dict(metadata or {})
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(v.astype(_FLOAT).tobytes() for v in vectors.values())
    return _PREFIX.pack(MAGIC, len(header_bytes)) + header_bytes + payload


def _decode_header(blob: bytes) -> tuple[dict[str, Any], int]:
    if len(blob) < _PREFIX.size:
        msg = "checkpoint is shorter than its fixed prefix"
        raise ParseError(msg, offset=len(blob))
    magic, header_len = _PREFIX.unpack_from(blob, 0)
    if magic != MAGIC:
        msg = f"bad magic {magic!r}"
        raise ParseError(msg, offset=0)
    start = _PREFIX.size
    end = start + header_len
    if end > len(blob):
        msg = f"header length {header_len} runs past the end of the file"
        raise ParseError(msg, offset=8)
    try:
        header = json.loads(blob[start:end].decode("utf-8"))
    except json.JSONDecodeError as err:
        msg = f"header is not valid JSON: {err.msg}"
        raise ParseError(msg, offset=start + err.pos) from err
    except UnicodeDecodeError as err:
        msg = "header is not valid UTF-8"
        raise ParseError(msg, offset=start + err.start) from err
    missing = [k for k in _REQUIRED_KEYS if k not in header]
    if missing:
        msg = f"header lacks {missing}"
        raise SchemaError(msg, offset=start)
    return header, end


def decode_checkpoint(
    blob: bytes, *, expected_dims: Sequence[int] | None = None
) -> Checkpoint:
    """Parse a checkpoint, optionally enforcing an architecture.

    Raises:
        ParseError: If the bytes are malformed (offset of the failure).
        SchemaError: If the header is incomplete or the architecture
            differs from ``expected_dims``.
    """
    header, offset = _decode_header(blob)
    dims = [int(d) for d in header["layer_dims"]]
    if expected_dims is not None and dims != list(expected_dims):
        msg = (
            f"checkpoint architecture {dims} does not match the expected "
            f"{list(expected_dims)}"
        )
        raise SchemaError(msg, offset=_PREFIX.size)
    if int(header["num_classes"]) != dims[-1]:
        msg = "num_classes disagrees with the last layer width"
        raise SchemaError(msg, offset=_PREFIX.size)

    vectors: dict[str, Array] = {}
    for section in header["sections"]:
        count = int(section["count"])
        end = offset + count * _FLOAT.itemsize
        if end > len(blob):
            msg = f"section {section['name']!r} is truncated"
            raise ParseError(msg, offset=len(blob))
        vectors[section["name"]] = np.frombuffer(
            blob, dtype=_FLOAT, count=count, offset=offset
        ).astype(np.float64)
        offset = end
    if offset != len(blob):
        msg = f"{len(blob) - offset} trailing bytes after the payload"
        raise ParseError(msg, offset=offset)
    if "params" not in vectors:
        msg = "checkpoint has no params section"
        raise SchemaError(msg, offset=_PREFIX.size)

    try:
        params = ModelParams.unflatten(
            vectors.pop("params"), dims, activation=header["activation"]
        )
    except ConfigurationError as err:
        msg = f"params section does not fit layer_dims {dims}: {err}"
        raise SchemaError(msg, offset=_PREFIX.size) from err
    except NumericError as err:
        msg = f"checkpoint holds non-finite parameters: {err}"
        raise SchemaError(msg, offset=offset) from err
    return Checkpoint(header=header, params=params, sections=vectors)


def save_params(
    path: Path,
    params: ModelParams,
    *,
    sections: Mapping[str, Array] | None = None,
    metadata: Mapping[str, Any] | None = None,
) -> Path:
    """Write the checkpoint and its JSON sidecar atomically."""
    blob = encode_checkpoint(params, sections=sections, metadata=metadata)
    write_bytes_atomic(path, blob)
    header, _ = _decode_header(blob)
    write_json(sidecar_path(path), header, sort_keys=True)
    logger.debug("Wrote checkpoint %s (%d bytes)", path, len(blob))
    return path


def read_checkpoint(
    path: Path, *, expected_dims: Sequence[int] | None = None
) -> Checkpoint:
    return decode_checkpoint(read_bytes(path), expected_dims=expected_dims)


def load_params(
    path: Path, *, expected_dims: Sequence[int] | None = None
) -> ModelParams:
    return read_checkpoint(path, expected_dims=expected_dims).params
