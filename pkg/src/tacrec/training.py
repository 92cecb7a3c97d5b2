"""Deterministic Adam training loop and grid-search model selection.

Two runs with identical (config, data, vocabulary) produce identical
training logs and checkpoints: epoch shuffles and dropout masks come from
the seeded counter-based stream, training is single-threaded, and the
validation metric is an integer hit count divided by an integer total.
"""

from __future__ import annotations

import numpy as np

from .checkpoint import Checkpoint
from .corpus import ProofStatePair, Vocabulary
from .errors import EmptyDataset, InvalidConfig
from .predict import step_probs, topn_hits
from .rng import SplitMix64
from .transformer import (
    ModelConfig,
    encode_batch,
    init_params,
    loss_and_grads,
    make_dropout_masks,
    param_count,
)

ADAM_B1 = 0.9
ADAM_B2 = 0.999
ADAM_EPS = 1e-8

# seeded sub-stream tags, one per independent randomness consumer
_TAG_SHUFFLE = 0x5F
_TAG_DROPOUT = 0xD0


class AdamState:
    """Per-parameter first/second moment accumulators with bias correction."""

    def __init__(self, params: dict[str, np.ndarray]):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def update(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float):
        self.t += 1
        b1t = 1.0 - ADAM_B1**self.t
        b2t = 1.0 - ADAM_B2**self.t
        for name, g in grads.items():
            m = self.m[name]
            v = self.v[name]
            m *= ADAM_B1
            m += (1.0 - ADAM_B1) * g
            v *= ADAM_B2
            v += (1.0 - ADAM_B2) * np.square(g)
            step = (lr / b1t) * m / (np.sqrt(v / b2t) + ADAM_EPS)
            params[name] -= step.astype(params[name].dtype)


def _encode_pairs(
    pairs: list[ProofStatePair], vocab: Vocabulary, window: int
) -> tuple[np.ndarray, np.ndarray]:
    if any(len(p.label) != 1 for p in pairs):
        raise InvalidConfig("training requires single-tactic labels")
    ids = encode_batch([list(p.context) for p in pairs], vocab, window)
    gold = np.asarray([vocab.encode(p.label[0]) for p in pairs], dtype=np.int64)
    return ids, gold


def validation_rate(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    vocab: Vocabulary,
    val_pairs: list[ProofStatePair],
    n: int = 7,
) -> float:
    """Top-n rate on single-tactic validation pairs (no dropout)."""
    ckpt = Checkpoint(config, vocab.digest, params, [], 0)
    probs = step_probs(ckpt, [list(p.context) for p in val_pairs], vocab)
    gold = np.asarray([vocab.encode(p.label[0]) for p in val_pairs])
    return float(np.count_nonzero(topn_hits(probs, gold, n))) / len(val_pairs)


def tf_train(
    config: ModelConfig,
    train: list[ProofStatePair],
    val: list[ProofStatePair],
    vocab: Vocabulary,
    log_fn=None,
) -> Checkpoint:
    """Train the encoder, returning the epoch with the best val top-7 rate.

    Ties in the validation rate go to the earlier epoch.  ``log_fn``, if
    given, receives one line of progress text per epoch.
    """
    if not train or not val:
        raise EmptyDataset("training requires non-empty train and val splits")
    train_ids, train_gold = _encode_pairs(train, vocab, config.window)
    n_train = len(train)
    params = init_params(config, len(vocab))
    adam = AdamState(params)
    base = SplitMix64(config.seed)
    shuffle_root = base.split(_TAG_SHUFFLE)
    dropout_root = base.split(_TAG_DROPOUT)

    log: list[tuple[int, float, float]] = []
    best_rate = -1.0
    best_epoch = 0
    best_params: dict[str, np.ndarray] = {}
    for epoch in range(1, config.epochs + 1):
        perm = np.asarray(shuffle_root.split(epoch).permutation(n_train))
        drop_stream = dropout_root.split(epoch)
        loss_sum = 0.0
        for start in range(0, n_train, config.batch):
            take = perm[start : start + config.batch]
            masks = make_dropout_masks(drop_stream, config, len(take))
            loss, grads = loss_and_grads(
                params, train_ids[take], train_gold[take], config, masks=masks
            )
            adam.update(params, grads, config.lr)
            loss_sum += loss * len(take)
        train_loss = loss_sum / n_train
        rate = validation_rate(params, config, vocab, val)
        log.append((epoch, train_loss, rate))
        if rate > best_rate:
            best_rate = rate
            best_epoch = epoch
            best_params = {k: v.copy() for k, v in params.items()}
        if log_fn is not None:
            log_fn(
                f"epoch {epoch:3d}  train_loss {train_loss:.4f}  val_top7 {rate:.4f}"
                + ("  *" if best_epoch == epoch else "")
            )
    return Checkpoint(
        config=config,
        vocab_digest=vocab.digest,
        params=best_params,
        training_log=log,
        best_epoch=best_epoch,
    )


def default_grid(base: ModelConfig) -> list[ModelConfig]:
    """Eight-point grid: layers x embed_dim x lr, other fields from base."""
    grid = []
    for layers in (1, 2):
        for d in (64, 128):
            for lr in (1e-3, 3e-4):
                grid.append(base.with_(layers=layers, embed_dim=d, lr=lr))
    return grid


def grid_search(
    grid: list[ModelConfig],
    train: list[ProofStatePair],
    val: list[ProofStatePair],
    vocab: Vocabulary,
    log_fn=None,
) -> tuple[ModelConfig, Checkpoint]:
    """Train every config; pick the best validation top-7 rate.

    Ties break by fewer parameters, then grid order.
    """
    if not grid:
        raise InvalidConfig("grid must contain at least one config")
    best = None
    for idx, config in enumerate(grid):
        if log_fn is not None:
            log_fn(
                f"grid [{idx + 1}/{len(grid)}] layers={config.layers} "
                f"embed_dim={config.embed_dim} lr={config.lr}"
            )
        ckpt = tf_train(config, train, val, vocab, log_fn=log_fn)
        rate = ckpt.training_log[ckpt.best_epoch - 1][2]
        key = (-rate, param_count(ckpt.params), idx)
        if best is None or key < best[0]:
            best = (key, config, ckpt)
    return best[1], best[2]
