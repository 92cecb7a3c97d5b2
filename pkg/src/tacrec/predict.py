"""Top-n / beam prediction over a trained checkpoint or an n-gram model.

Single-context prediction and batched evaluation share one code path:
``step_probs`` produces per-context distributions over the vocabulary, and
the ranking helpers below turn them into ordered candidate lists.  Special
ids (PAD/UNK/CLS) are never recommended; a candidate is admissible only if
its probability is strictly positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .checkpoint import Checkpoint
from .corpus import N_SPECIALS, Vocabulary
from .errors import EmptyContext, InvalidConfig
from .ngram import NgramModel, ngram_predict
from .transformer import encode_batch, forward, softmax_probs


@dataclass(frozen=True)
class Recommendation:
    items: tuple[tuple[tuple[str, ...], float], ...]
    n: int
    k: int


def _resolve_vocab(model, vocab: Vocabulary | None) -> Vocabulary:
    if isinstance(model, NgramModel):
        if vocab is not None and vocab != model.vocab:
            raise InvalidConfig("n-gram model carries its own vocabulary")
        return model.vocab
    if vocab is None:
        raise InvalidConfig("a vocabulary is required to use a checkpoint")
    if isinstance(model, Checkpoint):
        model.check_vocab(vocab)
    return vocab


def step_probs(
    model, contexts: list, vocab: Vocabulary, chunk: int = 512
) -> np.ndarray:
    """Per-context next-token distributions, shape (len(contexts), |V|).

    Float64 rows; specials are zeroed for the n-gram route and carry their
    softmax mass for the encoder route (they are excluded from ranking
    either way, so scores stay sub-vectors of one distribution).
    """
    for c in contexts:
        if not c:
            raise EmptyContext("cannot predict from an empty context")
    if isinstance(model, NgramModel):
        return np.stack([ngram_predict(model, list(c)) for c in contexts])
    if not isinstance(model, Checkpoint):
        raise InvalidConfig(f"unsupported model type {type(model).__name__}")
    out = np.empty((len(contexts), len(vocab)), dtype=np.float64)
    w = model.config.window
    for start in range(0, len(contexts), chunk):
        batch = contexts[start : start + chunk]
        ids = encode_batch(batch, vocab, w)
        out[start : start + len(batch)] = softmax_probs(
            forward(model.params, ids, model.config)
        )
    return out


def ranked_ids(probs: np.ndarray, limit: int) -> list[np.ndarray]:
    """Per row: admissible non-special ids by (probability desc, id asc).

    Stable argsort over id-ordered columns gives the ascending-id tie rule
    for free.  At most ``limit`` ids per row.
    """
    probs = np.atleast_2d(probs)
    q = probs.copy()
    q[:, :N_SPECIALS] = 0.0
    order = np.argsort(-q, axis=1, kind="stable")
    rows = []
    for r in range(q.shape[0]):
        ids = order[r]
        ids = ids[q[r, ids] > 0.0][:limit]
        rows.append(ids)
    return rows


def topn_hits(probs: np.ndarray, gold_ids: np.ndarray, n: int) -> np.ndarray:
    """Boolean hit vector: gold id among the admissible top n of its row."""
    probs = np.atleast_2d(probs)
    gold_ids = np.atleast_1d(gold_ids)
    q = probs.copy()
    q[:, :N_SPECIALS] = 0.0
    rows = np.arange(q.shape[0])
    admissible = q[rows, gold_ids] > 0.0
    # Admissible entries always outrank zero-probability ones, so membership
    # in the first n argsort columns plus admissibility is an exact check.
    order = np.argsort(-q, axis=1, kind="stable")[:, :n]
    return (order == gold_ids[:, None]).any(axis=1) & admissible


def pair_candidates(
    model, contexts: list, n: int, k: int, vocab: Vocabulary | None = None, beam: int | None = None
) -> list[list[tuple[tuple[int, ...], float]]]:
    """Ranked (id tuple, score) candidates per context, for k in {1,2}.

    k=1: top n single ids by the step distribution.  k=2: beam of width
    max(n, 8) over first steps, each re-encoded with the chosen tactic
    appended; pair score is the product of the two step probabilities and
    ties break by lexicographic id pair.  With beam >= |V| the expansion
    is exhaustive over admissible pairs.
    """
    if n < 1:
        raise InvalidConfig("n must be >= 1")
    if k not in (1, 2):
        raise InvalidConfig("k must be 1 or 2")
    vocab = _resolve_vocab(model, vocab)
    p1 = step_probs(model, contexts, vocab)
    if k == 1:
        return [
            [((int(i),), float(p1[r, i])) for i in ids]
            for r, ids in enumerate(ranked_ids(p1, n))
        ]

    width = max(n, 8) if beam is None else max(beam, n)
    firsts = ranked_ids(p1, width)
    flat_contexts = []
    row_of = []
    for r, ids in enumerate(firsts):
        for i in ids:
            flat_contexts.append(list(contexts[r]) + [vocab.decode(int(i))])
            row_of.append(r)
    results: list[list[tuple[tuple[int, ...], float]]] = [[] for _ in contexts]
    if flat_contexts:
        p2 = step_probs(model, flat_contexts, vocab)
        seconds = ranked_ids(p2, width)
        scored: list[list[tuple[float, int, int]]] = [[] for _ in contexts]
        pos = 0
        for r, ids in enumerate(firsts):
            for i in ids:
                s1 = float(p1[r, i])
                for j in seconds[pos]:
                    scored[r].append((s1 * float(p2[pos, j]), int(i), int(j)))
                pos += 1
        for r, cands in enumerate(scored):
            cands.sort(key=lambda t: (-t[0], t[1], t[2]))
            results[r] = [((i, j), s) for s, i, j in cands[:n]]
    return results


def predict_topn(
    model, context: list[str], n: int, k: int = 1, vocab: Vocabulary | None = None
) -> Recommendation:
    """Top-n recommendation of the next k tactics for one context."""
    resolved = _resolve_vocab(model, vocab)
    cands = pair_candidates(model, [list(context)], n, k, vocab=vocab)[0]
    items = tuple(
        (tuple(resolved.decode(i) for i in ids), score) for ids, score in cands
    )
    return Recommendation(items=items, n=n, k=k)
