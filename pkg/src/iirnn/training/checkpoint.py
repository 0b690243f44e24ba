"""Binary checkpoint file.

Layout (integers are little-endian u64)::

    b"IIRNN1"
    header length, header JSON (UTF-8)
    array count
    per array: name length, name, rank, dims..., float32 LE data
    checksum (first 8 bytes of BLAKE2b over everything before it)
"""

import hashlib
import json
import logging
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from iirnn.config import TrainConfig
from iirnn.errors import CheckpointError, FormatError
from iirnn.nets.params import ModelParams
from iirnn.numerics.arrays import DenseArray

logger = logging.getLogger(__name__)

MAGIC = b"IIRNN1"
FORMAT_VERSION = 1
_U64 = struct.Struct("<Q")


@dataclass
class Checkpoint:
    config: TrainConfig
    params: ModelParams
    vocab_hash: str
    epoch: int = 0
    adam_t: int = 0
    adam_arrays: dict[str, DenseArray] = field(default_factory=dict)

    def arrays(self) -> dict[str, DenseArray]:
        return {**self.params.named(), **self.adam_arrays}

    def copy(self) -> "Checkpoint":
        return Checkpoint(
            config=self.config.model_copy(),
            params=self.params.copy(),
            vocab_hash=self.vocab_hash,
            epoch=self.epoch,
            adam_t=self.adam_t,
            adam_arrays={k: v.copy() for k, v in self.adam_arrays.items()},
        )


def checkpoint_bytes(ckpt: Checkpoint) -> bytes:
    header = json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "config": ckpt.config.model_dump(mode="json"),
            "vocab_hash": ckpt.vocab_hash,
            "epoch": ckpt.epoch,
            "adam_t": ckpt.adam_t,
        },
        sort_keys=True,
    ).encode("utf-8")
    arrays = ckpt.arrays()
    parts = [MAGIC, _U64.pack(len(header)), header, _U64.pack(len(arrays))]
    for name, arr in arrays.items():
        encoded = name.encode("utf-8")
        parts.append(_U64.pack(len(encoded)))
        parts.append(encoded)
        parts.append(_U64.pack(arr.ndim))
        parts.extend(_U64.pack(dim) for dim in arr.shape)
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    body = b"".join(parts)
    digest = hashlib.blake2b(body, digest_size=8).digest()
    return body + digest


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> Path:
    """Write atomically: a temporary file in the same directory, then rename."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    data = checkpoint_bytes(ckpt)
    fd, tmp = tempfile.mkstemp(prefix=f".{p.name}.", dir=p.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, p)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.info("Saved checkpoint (epoch %d) to %s", ckpt.epoch, p)
    return p


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise FormatError("checkpoint is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u64(self) -> int:
        return _U64.unpack(self.take(8))[0]


def parse_checkpoint(data: bytes, vocab_hash: str | None = None) -> Checkpoint:
    if len(data) < len(MAGIC) + 8 or not data.startswith(MAGIC):
        raise FormatError("not an iirnn checkpoint")
    body, stored = data[:-8], data[-8:]
    if hashlib.blake2b(body, digest_size=8).digest() != stored:
        raise FormatError("checkpoint checksum mismatch (truncated or corrupted)")

    reader = _Reader(body)
    reader.take(len(MAGIC))
    try:
        header = json.loads(reader.take(reader.u64()).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable checkpoint header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise FormatError(
            f"checkpoint format version {header.get('format_version')} "
            f"is not {FORMAT_VERSION}"
        )
    if vocab_hash is not None and header["vocab_hash"] != vocab_hash:
        raise CheckpointError(
            "checkpoint was trained on a different item vocabulary"
        )

    arrays: dict[str, DenseArray] = {}
    for _ in range(reader.u64()):
        name = reader.take(reader.u64()).decode("utf-8")
        shape = tuple(reader.u64() for _ in range(reader.u64()))
        size = int(np.prod(shape, dtype=np.int64))
        raw = reader.take(4 * size)
        arrays[name] = np.frombuffer(raw, dtype="<f4").astype(np.float32).reshape(shape)
    if reader.pos != len(body):
        raise FormatError("trailing bytes after the last array")

    config = TrainConfig.model_validate(header["config"])
    adam = {k: v for k, v in arrays.items() if k.startswith("adam.")}
    named = {k: v for k, v in arrays.items() if not k.startswith("adam.")}
    return Checkpoint(
        config=config,
        params=ModelParams.from_named(config.variant, named),
        vocab_hash=header["vocab_hash"],
        epoch=int(header["epoch"]),
        adam_t=int(header["adam_t"]),
        adam_arrays=adam,
    )


def load_checkpoint(path: str | Path, vocab_hash: str | None = None) -> Checkpoint:
    """Read a checkpoint; with ``vocab_hash``, refuse one built on another corpus."""
    p = Path(path)
    if not p.is_file():
        raise FormatError(f"checkpoint not found: {p}")
    return parse_checkpoint(p.read_bytes(), vocab_hash)
