"""
Checkpoint container.

    apedit-checkpoint 1
    <header size in bytes>
    <JSON header: format version, model config, vocabularies, tensor names and shapes>
    <tensors, in header order, as little-endian float32>
"""

import json
from pathlib import Path
from typing import NotRequired, TypedDict

import numpy as np
from pydantic import TypeAdapter, ValidationError

from apedit.errors import CheckpointError
from apedit.logs import logs
from apedit.model.base import ApeModel
from apedit.model.config import ModelConfig
from apedit.numcore import get_dtype
from apedit.vocab import Vocab

__all__ = ("FORMAT_VERSION", "save_checkpoint", "load_checkpoint", "read_header")

FORMAT_VERSION = 1
_MAGIC = "apedit-checkpoint"
_TENSOR_DTYPE = np.dtype("<f4")


class TensorInfo(TypedDict):
    name: str
    shape: list[int]


class VocabData(TypedDict):
    kind: str
    itos: list[str]
    pad: str
    unk: str
    bos: str
    eos: str


class CheckpointHeader(TypedDict):
    format_version: int
    config: dict
    vocabs: dict[str, VocabData]
    tensors: list[TensorInfo]
    meta: NotRequired[dict]


_header_adapter = TypeAdapter(CheckpointHeader)


def save_checkpoint(model: ApeModel, path: Path, meta: dict | None = None):
    header: CheckpointHeader = {
        "format_version": FORMAT_VERSION,
        "config": model.config.dict(),
        "vocabs": {role: vocab.data for role, vocab in model.vocabs.items()},  # type: ignore[misc]
        "tensors": [{"name": p.name, "shape": list(p.shape)} for p in model.parameters()],
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, ensure_ascii=False).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    with tmp_path.open("wb") as f:
        f.write(f"{_MAGIC} {FORMAT_VERSION}\n{len(header_bytes)}\n".encode("ascii"))
        f.write(header_bytes)
        for param in model.parameters():
            f.write(np.ascontiguousarray(param.value, dtype=_TENSOR_DTYPE).tobytes())
    tmp_path.replace(path)
    logs.debug(f"Saved checkpoint {str(path)!r} ({len(model.parameters())} tensors)")


def _read(path: Path) -> tuple[CheckpointHeader, bytes]:
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint {str(path)!r}: {e}") from e
    try:
        magic_end = data.index(b"\n")
        size_end = data.index(b"\n", magic_end + 1)
        magic, version = data[:magic_end].decode("ascii").split()
        header_size = int(data[magic_end + 1 : size_end])
    except ValueError as e:
        raise CheckpointError(f"{str(path)!r} is not an apedit checkpoint") from e
    if magic != _MAGIC:
        raise CheckpointError(f"{str(path)!r} is not an apedit checkpoint")
    if int(version) != FORMAT_VERSION:
        raise CheckpointError(f"Unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
    body_start = size_end + 1
    try:
        header = _header_adapter.validate_python(json.loads(data[body_start : body_start + header_size]))
    except (ValidationError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Invalid checkpoint header in {str(path)!r}: {e}") from e
    return header, data[body_start + header_size :]


def read_header(path: Path) -> CheckpointHeader:
    return _read(path)[0]


def load_checkpoint(path: Path) -> ApeModel:
    """Rebuild the model described by the header and load its tensors, checking every name and shape."""
    from apedit.model import create_model

    header, body = _read(path)
    try:
        config = ModelConfig.from_dict(header["config"])
        vocabs = {role: Vocab.from_data(dict(data)) for role, data in header["vocabs"].items()}
    except (ValidationError, ValueError) as e:
        raise CheckpointError(f"Invalid model description in {str(path)!r}: {e}") from e
    model = create_model(config, vocabs)

    expected = {p.name: p for p in model.parameters()}
    stored = [t["name"] for t in header["tensors"]]
    if set(stored) != set(expected) or len(stored) != len(expected):
        missing = sorted(set(expected) - set(stored))
        unexpected = sorted(set(stored) - set(expected))
        raise CheckpointError(f"Tensor names do not match the config (missing: {missing}, unexpected: {unexpected})")

    offset = 0
    for info in header["tensors"]:
        param = expected[info["name"]]
        if tuple(info["shape"]) != param.shape:
            raise CheckpointError(f"Tensor {info['name']!r} has shape {info['shape']}, config expects {param.shape}")
        nbytes = int(np.prod(param.shape)) * _TENSOR_DTYPE.itemsize
        chunk = body[offset : offset + nbytes]
        if len(chunk) != nbytes:
            raise CheckpointError(f"Checkpoint {str(path)!r} is truncated at tensor {info['name']!r}")
        param.value[...] = np.frombuffer(chunk, dtype=_TENSOR_DTYPE).reshape(param.shape).astype(get_dtype())
        offset += nbytes
    if offset != len(body):
        raise CheckpointError(f"Checkpoint {str(path)!r} has {len(body) - offset} trailing bytes")
    return model
