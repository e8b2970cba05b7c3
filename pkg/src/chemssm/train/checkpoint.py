"""Self-describing binary checkpoints with bit-exact round trips.

Layout: 8-byte magic, u32 format version, u64 header length, UTF-8 JSON
header (model config, vocabulary, optional task-head descriptor, metadata,
and a parameter index with shapes), then each parameter as u32 name length,
name bytes, u32 ndim, u64 dims, raw little-endian float64 data. The payload
is cross-checked against the header index on load.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from ..chem.tokenizer import Vocabulary
from ..model.config import ModelConfig

MAGIC = b"CSSMCKPT"
FORMAT_VERSION = 1


class CheckpointIoError(OSError):
    """Truncated, unreadable, or structurally broken checkpoint file."""


class FormatVersionMismatchError(ValueError):
    pass


class ShapeHeaderMismatchError(ValueError):
    pass


@dataclass
class Checkpoint:
    model_config: ModelConfig
    vocab: Vocabulary
    params: dict[str, np.ndarray]
    head: dict | None = None  # {"kind", "label_mean", "label_std"} when fine-tuned
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CheckpointHeader:
    format_version: int
    model_config: ModelConfig
    vocab: Vocabulary
    head: dict | None
    metadata: dict
    param_shapes: dict[str, tuple[int, ...]]


def save_checkpoint(ckpt: Checkpoint, path: Union[str, Path]) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "model_config": ckpt.model_config.to_dict(),
        "vocabulary": list(ckpt.vocab.tokens),
        "task_head": ckpt.head,
        "metadata": ckpt.metadata,
        "params": [
            {"name": name, "shape": list(arr.shape)} for name, arr in ckpt.params.items()
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for name, arr in ckpt.params.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_exact(fh: BinaryIO, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CheckpointIoError(f"truncated checkpoint while reading {what}")
    return data


def _read_header(fh: BinaryIO) -> CheckpointHeader:
    magic = _read_exact(fh, len(MAGIC), "magic")
    if magic != MAGIC:
        raise FormatVersionMismatchError(f"bad magic {magic!r}; not a checkpoint file")
    (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
    if version != FORMAT_VERSION:
        raise FormatVersionMismatchError(
            f"checkpoint format version {version}, expected {FORMAT_VERSION}"
        )
    (header_len,) = struct.unpack("<Q", _read_exact(fh, 8, "header length"))
    try:
        header = json.loads(_read_exact(fh, header_len, "header").decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as err:
        raise CheckpointIoError(f"unparsable checkpoint header: {err}") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise FormatVersionMismatchError("header format_version disagrees with file version")
    vocab_tokens = header["vocabulary"]
    from ..chem.tokenizer import SPECIAL_TOKENS

    if tuple(vocab_tokens[:4]) != SPECIAL_TOKENS:
        raise CheckpointIoError("header vocabulary does not start with the special tokens")
    return CheckpointHeader(
        format_version=version,
        model_config=ModelConfig.from_dict(header["model_config"]),
        vocab=Vocabulary(vocab_tokens[4:]),
        head=header.get("task_head"),
        metadata=header.get("metadata", {}),
        param_shapes={
            entry["name"]: tuple(entry["shape"]) for entry in header["params"]
        },
    )


def load_checkpoint_header(path: Union[str, Path]) -> CheckpointHeader:
    """Read config and metadata without touching the payload."""
    with open(path, "rb") as fh:
        return _read_header(fh)


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    with open(path, "rb") as fh:
        header = _read_header(fh)
        params: dict[str, np.ndarray] = {}
        for expected_name, expected_shape in header.param_shapes.items():
            (name_len,) = struct.unpack("<I", _read_exact(fh, 4, "param name length"))
            name = _read_exact(fh, name_len, "param name").decode("utf-8")
            (ndim,) = struct.unpack("<I", _read_exact(fh, 4, "param ndim"))
            shape = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim, "param shape"))
            if name != expected_name or tuple(shape) != expected_shape:
                raise ShapeHeaderMismatchError(
                    f"payload param {name!r} {shape} does not match header entry "
                    f"{expected_name!r} {expected_shape}"
                )
            size = int(np.prod(shape)) if shape else 1
            raw = _read_exact(fh, size * 8, f"param {name!r} data")
            params[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).copy()
        trailing = fh.read(1)
        if trailing:
            raise CheckpointIoError("trailing bytes after final parameter")
    return Checkpoint(header.model_config, header.vocab, params, header.head, header.metadata)
