"""Exact n-gram backoff predictor over tactic contexts.

Longest-matching-suffix lookup with no interpolation ("stupid backoff"):
prediction uses the count table of the longest context suffix (up to
``max_order``) that has been observed, normalized to a distribution.  Counts
are exact integers, so tests can compare predictions against brute-force
recounting with rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import N_SPECIALS, ProofStatePair, Vocabulary
from .errors import EmptyContext, InvalidConfig


@dataclass
class NgramModel:
    max_order: int
    vocab: Vocabulary
    # context suffix tuple (length 0..max_order) -> {label token: count}
    counts: dict[tuple[str, ...], dict[str, int]] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return f"ngram(max_order={self.max_order})"


def ngram_fit(
    train: list[ProofStatePair], vocab: Vocabulary, max_order: int = 3
) -> NgramModel:
    """Count (suffix, next tactic) occurrences for every order 0..max_order."""
    if max_order < 0:
        raise InvalidConfig("max_order must be >= 0")
    model = NgramModel(max_order=max_order, vocab=vocab)
    for pair in train:
        if len(pair.label) != 1:
            raise InvalidConfig("n-gram fitting requires k=1 labels")
        label = pair.label[0]
        ctx = pair.context
        for order in range(0, max_order + 1):
            if order > len(ctx):
                break
            suffix = ctx[len(ctx) - order :]
            table = model.counts.setdefault(suffix, {})
            table[label] = table.get(label, 0) + 1
    return model


def matched_counts(
    model: NgramModel, context: tuple[str, ...] | list[str]
) -> tuple[dict[str, int], int]:
    """The count table of the longest matching suffix, and its order.

    Falls back to shorter suffixes down to order 0; returns an empty table
    (order 0) only when the model is empty.
    """
    if not context:
        raise EmptyContext("n-gram prediction requires a non-empty context")
    ctx = tuple(context)
    top = min(model.max_order, len(ctx))
    for order in range(top, -1, -1):
        suffix = ctx[len(ctx) - order :]
        table = model.counts.get(suffix)
        if table:
            return table, order
    return {}, 0


def ngram_predict(model: NgramModel, context: tuple[str, ...] | list[str]) -> np.ndarray:
    """Probability vector over the vocabulary (specials stay at zero).

    Uniform over non-special tokens when even the order-0 table is empty.
    """
    vocab = model.vocab
    probs = np.zeros(len(vocab), dtype=np.float64)
    table, _ = matched_counts(model, context)
    if not table:
        n_real = len(vocab) - N_SPECIALS
        if n_real > 0:
            probs[N_SPECIALS:] = 1.0 / n_real
        return probs
    total = sum(table.values())
    for token, count in table.items():
        token_id = vocab.encode(token)
        if token_id >= N_SPECIALS:
            probs[token_id] += count / total
    return probs
