"""Versioned binary checkpoints.

Layout (all integers little-endian)::

    b"AASIST3\\x00"                   magic
    u32 version
    u32 n, n bytes                    JSON model configuration
    u32 count                         number of tensors
    per tensor: u16 n, name | u8 ndim | u32 * ndim shape | float32 values
    u32 crc32 of everything after the magic
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .config import ModelConfig, from_dict, to_dict
from .errors import CheckpointConfigError, CheckpointFormatError, CheckpointShapeError, CheckpointVersionError
from .errors import ConfigError

MAGIC = b"AASIST3\x00"
VERSION = 1


def encode_checkpoint(config: ModelConfig, state: dict[str, np.ndarray]) -> bytes:
    body = bytearray(struct.pack("<I", VERSION))
    cfg = json.dumps(to_dict(config), sort_keys=True).encode()
    body += struct.pack("<I", len(cfg)) + cfg
    body += struct.pack("<I", len(state))
    for name, value in state.items():
        raw = name.encode()
        value = np.asarray(value)
        body += struct.pack("<H", len(raw)) + raw
        body += struct.pack("<B", value.ndim) + struct.pack(f"<{value.ndim}I", *value.shape)
        body += value.astype("<f4").tobytes()
    body += struct.pack("<I", zlib.crc32(body))
    return MAGIC + bytes(body)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointFormatError("checkpoint is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_checkpoint(data: bytes) -> tuple[ModelConfig, dict[str, np.ndarray]]:
    if data[: len(MAGIC)] != MAGIC:
        raise CheckpointFormatError("not a checkpoint file (bad magic bytes)")
    reader = _Reader(data[len(MAGIC) :])
    (version,) = reader.unpack("<I")
    if version != VERSION:
        raise CheckpointVersionError(f"checkpoint format version {version}, this build reads {VERSION}")
    (n,) = reader.unpack("<I")
    try:
        config = from_dict(ModelConfig, json.loads(reader.take(n).decode()), "model")
    except (ValueError, ConfigError) as exc:
        raise CheckpointConfigError(f"embedded configuration is invalid: {exc}") from exc
    (count,) = reader.unpack("<I")
    state = {}
    for _ in range(count):
        (n,) = reader.unpack("<H")
        name = reader.take(n).decode()
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I")
        size = int(np.prod(shape, dtype=np.int64))
        state[name] = np.frombuffer(reader.take(4 * size), dtype="<f4").reshape(shape).astype(np.float64)
    end = reader.pos
    (crc,) = reader.unpack("<I")
    if reader.pos != len(reader.data):
        raise CheckpointFormatError("trailing bytes after checkpoint payload")
    if crc != zlib.crc32(reader.data[:end]):
        raise CheckpointFormatError("checkpoint checksum mismatch")
    return config, state


def save_checkpoint(model, path) -> None:
    Path(path).write_bytes(encode_checkpoint(model.config, model.state_dict()))


def load_state(model, state: dict[str, np.ndarray]) -> None:
    """Copy ``state`` into ``model`` after checking names and shapes."""
    expected = model.state_dict()
    missing = sorted(set(expected) - set(state))
    extra = sorted(set(state) - set(expected))
    if missing or extra:
        raise CheckpointShapeError(f"tensor names differ; missing {missing[:3]}, unexpected {extra[:3]}")
    for name, value in expected.items():
        if tuple(state[name].shape) != tuple(value.shape):
            raise CheckpointShapeError(f"{name}: stored shape {state[name].shape}, model expects {value.shape}")
    model.load_state_dict(state)


def load_checkpoint(path, expected_config: ModelConfig | None = None):
    """Rebuild the model stored at ``path``; optionally require a specific configuration."""
    from .model import Aasist3Model

    config, state = decode_checkpoint(Path(path).read_bytes())
    if expected_config is not None and to_dict(expected_config) != to_dict(config):
        diff = [k for k, v in to_dict(config).items() if to_dict(expected_config).get(k) != v]
        raise CheckpointConfigError(f"checkpoint configuration differs in {diff}")
    model = Aasist3Model(config)
    load_state(model, state)
    return model
