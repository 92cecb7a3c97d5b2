"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from tacrec.corpus import ProofStatePair, Vocabulary, build_pairs, build_vocab, split_dataset
from tacrec.predict import Recommendation
from tacrec.rng import SplitMix64, mix64

FIXTURE_DIR = None  # resolved lazily in fixture below


@pytest.fixture
def fixture_corpus_dir():
    from pathlib import Path

    return Path(__file__).parent / "fixtures" / "corpus"


def mk_pair(context, label, proof_id=0, offset=None) -> ProofStatePair:
    """Build a ProofStatePair with sensible defaults for hand-written cases."""
    if offset is None:
        offset = len(context)
    return ProofStatePair(
        context=tuple(context), label=tuple(label), proof_id=proof_id, offset=offset
    )


def random_proofs(
    seed: int,
    n_proofs: int,
    n_tokens: int = 8,
    min_len: int = 1,
    max_len: int = 40,
    prefix: str = "t",
) -> list[list[str]]:
    """Random token-sequence corpus driven by the artifact PRNG."""
    rng = SplitMix64(seed)
    toks = [f"{prefix}{i:02d}" for i in range(n_tokens)]
    proofs = []
    for _ in range(n_proofs):
        m = min_len + rng.next_below(max_len - min_len + 1)
        proofs.append([toks[rng.next_below(n_tokens)] for _ in range(m)])
    return proofs


def markov2_proofs(
    seed: int,
    n_proofs: int = 500,
    n_tokens: int = 20,
    n_starts: int = 30,
    min_len: int = 8,
    max_len: int = 16,
    salt: int = 0xC6,
) -> list[list[str]]:
    """Corpus where every tactic after the second is a fixed function of the
    previous two — the next step is exactly predictable from an order-2 count
    table, so a perfect predictor's ceiling is known to be 100%.

    Start pairs are drawn from a small fixed pool so that every transition key
    occurring anywhere in the corpus is seen many times.
    """
    toks = [f"tac{i:02d}" for i in range(n_tokens)]

    def rule(a: str, b: str) -> str:
        return toks[mix64((toks.index(a) * n_tokens + toks.index(b)) ^ salt) % n_tokens]

    starts = []
    for s in range(n_starts):
        h = mix64(0x57A7 + s)
        starts.append((toks[h % n_tokens], toks[(h >> 8) % n_tokens]))
    rng = SplitMix64(seed)
    proofs = []
    for _ in range(n_proofs):
        a, b = starts[rng.next_below(n_starts)]
        m = min_len + rng.next_below(max_len - min_len + 1)
        seq = [a, b]
        while len(seq) < m:
            seq.append(rule(seq[-2], seq[-1]))
        proofs.append(seq)
    return proofs


def toy_training_setup(seed: int = 11, n_proofs: int = 60, n_tokens: int = 6):
    """Small (train, val, vocab) triple for fast training-path tests."""
    proofs = random_proofs(seed, n_proofs, n_tokens=n_tokens, min_len=4, max_len=9)
    pairs = build_pairs(proofs, context_min=3, k=1)
    split = split_dataset(pairs, ratio=0.9, seed=seed + 1)
    vocab = build_vocab(split.train)
    return split.train, split.test, vocab


class RiggedPredictor:
    """Duck-typed predictor returning a fixed ranked candidate list per context.

    ``table`` maps context tuples to a ranked list of label tuples; contexts
    not in the table fall back to ``default`` (also a ranked list).
    """

    def __init__(self, table=None, default=(), name="rigged"):
        self.table = dict(table or {})
        self.default = list(default)
        self.name = name

    def predict_topn(self, context, n, k=1):
        ranked = self.table.get(tuple(context), self.default)
        items = []
        score = 1.0
        for cand in ranked[:n]:
            score /= 2.0
            items.append((tuple(cand), score))
        return Recommendation(items=tuple(items), n=n, k=k)


class MemorizingPredictor:
    """Ranks every gold label seen for a context ahead of everything else.

    Duplicate contexts with different gold labels each stay within the first
    few ranks, so the predictor scores 100% whenever n covers the number of
    distinct labels recorded for the context.
    """

    name = "memorizer"

    def __init__(self, pairs):
        self.table: dict[tuple, list[tuple]] = {}
        for p in pairs:
            ranked = self.table.setdefault(tuple(p.context), [])
            if tuple(p.label) not in ranked:
                ranked.append(tuple(p.label))

    def predict_topn(self, context, n, k=1):
        ranked = self.table.get(tuple(context), [])
        items = []
        score = 1.0
        for cand in ranked[:n]:
            score /= 2.0
            items.append((cand, score))
        return Recommendation(items=tuple(items), n=n, k=k)


class ExcludingPredictor:
    """Ranks everything except any gold label seen for the context (never hits)."""

    name = "excluder"

    def __init__(self, pairs, vocab: Vocabulary, k: int = 1):
        self.table: dict[tuple, set[tuple]] = {}
        for p in pairs:
            self.table.setdefault(tuple(p.context), set()).add(tuple(p.label))
        self.vocab = vocab
        self.k = k

    def predict_topn(self, context, n, k=1):
        golds = self.table.get(tuple(context), set())
        toks = self.vocab.tokens
        if k == 1:
            cands = [(t,) for t in toks]
        else:
            cands = [(a, b) for a in toks for b in toks]
        items = []
        score = 1.0
        for cand in cands:
            if cand in golds:
                continue
            if len(items) == n:
                break
            score /= 2.0
            items.append((cand, score))
        return Recommendation(items=tuple(items), n=n, k=k)


def softmax_ref(logits: np.ndarray) -> np.ndarray:
    """Independent float64 softmax used as a comparison oracle."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
