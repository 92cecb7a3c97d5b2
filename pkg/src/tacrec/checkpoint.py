"""Binary checkpoint format for trained models.

Layout: magic bytes ``TACREC01``, then five length-prefixed segments
(u64 little-endian byte length, then payload):

1. model config as JSON
2. vocabulary digest, 8 bytes little-endian
3. parameter directory as JSON: list of {name, shape, offset}
4. concatenated raw little-endian float32 arrays
5. training log as JSON: {entries: [[epoch, train_loss, val_rate], ...],
   best_epoch}

Offsets in segment 3 are byte offsets into segment 4.  Using the
checkpoint with a vocabulary whose digest differs is rejected with
``vocab-mismatch``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Vocabulary
from .errors import CorruptCheckpoint, IoError, VocabMismatch
from .transformer import ModelConfig

MAGIC = b"TACREC01"


@dataclass
class Checkpoint:
    config: ModelConfig
    vocab_digest: int
    params: dict[str, np.ndarray]
    training_log: list[tuple[int, float, float]]
    best_epoch: int

    @property
    def name(self) -> str:
        return (
            f"encoder(layers={self.config.layers}, embed_dim={self.config.embed_dim}, "
            f"epoch={self.best_epoch})"
        )

    def check_vocab(self, vocab: Vocabulary) -> None:
        if vocab.digest != self.vocab_digest:
            raise VocabMismatch(
                f"checkpoint was trained with vocabulary digest "
                f"{self.vocab_digest:016x}, got {vocab.digest:016x}"
            )


def _segment(payload: bytes) -> bytes:
    return struct.pack("<Q", len(payload)) + payload


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    directory = []
    blobs = []
    offset = 0
    for name in sorted(ckpt.params):
        arr = np.ascontiguousarray(ckpt.params[name], dtype="<f4")
        directory.append({"name": name, "shape": list(arr.shape), "offset": offset})
        raw = arr.tobytes()
        blobs.append(raw)
        offset += len(raw)
    log_obj = {
        "entries": [[e, loss, rate] for e, loss, rate in ckpt.training_log],
        "best_epoch": ckpt.best_epoch,
    }
    data = MAGIC
    data += _segment(json.dumps(ckpt.config.to_dict(), sort_keys=True).encode())
    data += _segment(struct.pack("<Q", ckpt.vocab_digest))
    data += _segment(json.dumps(directory, sort_keys=True).encode())
    data += _segment(b"".join(blobs))
    data += _segment(json.dumps(log_obj, sort_keys=True).encode())
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise IoError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path: str | Path) -> Checkpoint:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read checkpoint {path}: {exc}") from exc
    if not data.startswith(MAGIC):
        raise CorruptCheckpoint(f"{path}: bad magic bytes")
    pos = len(MAGIC)
    segments = []
    for _ in range(5):
        if pos + 8 > len(data):
            raise CorruptCheckpoint(f"{path}: truncated segment header")
        (length,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        if pos + length > len(data):
            raise CorruptCheckpoint(f"{path}: truncated segment payload")
        segments.append(data[pos : pos + length])
        pos += length
    try:
        config = ModelConfig.from_dict(json.loads(segments[0]))
        (digest,) = struct.unpack("<Q", segments[1])
        directory = json.loads(segments[2])
        raw = segments[3]
        log_obj = json.loads(segments[4])
    except (ValueError, struct.error, TypeError) as exc:
        raise CorruptCheckpoint(f"{path}: {exc}") from exc
    params: dict[str, np.ndarray] = {}
    for entry in directory:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + 4 * count
        if end > len(raw):
            raise CorruptCheckpoint(f"{path}: parameter {entry['name']} out of bounds")
        arr = np.frombuffer(raw[start:end], dtype="<f4").reshape(shape)
        params[entry["name"]] = arr.astype(np.float32)  # writable copy
    if not all(np.isfinite(p).all() for p in params.values()):
        raise CorruptCheckpoint(f"{path}: non-finite parameter values")
    log = [(int(e), float(l), float(r)) for e, l, r in log_obj["entries"]]
    return Checkpoint(
        config=config,
        vocab_digest=digest,
        params=params,
        training_log=log,
        best_epoch=int(log_obj["best_epoch"]),
    )


def vocab_sidecar_path(ckpt_path: str | Path) -> Path:
    return Path(str(ckpt_path) + ".vocab")


def save_vocab_sidecar(vocab: Vocabulary, ckpt_path: str | Path) -> None:
    path = vocab_sidecar_path(ckpt_path)
    try:
        path.write_text("".join(t + "\n" for t in vocab.tokens), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write vocabulary {path}: {exc}") from exc


def load_vocab_sidecar(ckpt: Checkpoint, ckpt_path: str | Path) -> Vocabulary:
    """Read the token list stored next to the checkpoint, digest-verified."""
    path = vocab_sidecar_path(ckpt_path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read vocabulary {path}: {exc}") from exc
    vocab = Vocabulary(lines)
    ckpt.check_vocab(vocab)
    return vocab
