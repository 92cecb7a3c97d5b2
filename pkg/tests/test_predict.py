"""Ranked top-n / k=2 beam prediction: examples, tie rules, beam exactness."""

import itertools

import numpy as np
import pytest

from conftest import mk_pair, random_proofs
from tacrec.corpus import N_SPECIALS, Vocabulary, build_pairs, build_vocab, split_dataset
from tacrec.errors import EmptyContext, InvalidConfig
from tacrec.ngram import ngram_fit, ngram_predict
from tacrec.predict import pair_candidates, predict_topn, ranked_ids, step_probs, topn_hits
from tacrec.training import tf_train
from tacrec.transformer import ModelConfig


def _uniform_model():
    """N-gram model with a known two-token distribution P(x)=0.6, P(y)=0.4."""
    train = [
        mk_pair(["a", "b", "c"], ["x"]),
        mk_pair(["a", "b", "c"], ["x"]),
        mk_pair(["a", "b", "c"], ["x"]),
        mk_pair(["a", "b", "c"], ["y"]),
        mk_pair(["a", "b", "c"], ["y"]),
    ]
    vocab = build_vocab(train)
    # order-0 only -> context-independent distribution
    model = ngram_fit(train, vocab, max_order=0)
    return model, vocab


def test_topn_k1_example():
    model, vocab = _uniform_model()
    rec = predict_topn(model, ["q", "r", "s"], n=2, k=1)
    assert [(list(t), pytest.approx(s)) for t, s in rec.items] == [
        (["x"], pytest.approx(0.6)),
        (["y"], pytest.approx(0.4)),
    ]
    assert rec.n == 2 and rec.k == 1


def test_topn_k2_product_scores_and_tie_order():
    model, vocab = _uniform_model()
    rec = predict_topn(model, ["q", "r", "s"], n=3, k=2)
    got = [(tuple(t), round(s, 6)) for t, s in rec.items]
    assert got == [
        (("x", "x"), pytest.approx(0.36)),
        (("x", "y"), pytest.approx(0.24)),  # tie with (y,x) -> lexicographic id order
        (("y", "x"), pytest.approx(0.24)),
    ]


def test_topn_scores_non_increasing_and_in_unit_interval():
    model, vocab = _uniform_model()
    rec = predict_topn(model, ["a"], n=10, k=2)
    scores = [s for _, s in rec.items]
    assert all(0 < s <= 1 for s in scores)
    assert all(a >= b for a, b in zip(scores, scores[1:]))


def test_topn_ngram_example_single_item():
    train = [
        mk_pair(["a", "b", "c"], ["d"]),
        mk_pair(["x", "b", "c"], ["d"]),
        mk_pair(["a", "b", "c"], ["e"]),
    ]
    vocab = build_vocab(train)
    model = ngram_fit(train, vocab, max_order=3)
    rec = predict_topn(model, ["z", "z", "b", "c"], n=1, k=1)
    ((tactics, score),) = rec.items
    assert tuple(tactics) == ("d",)
    assert score == pytest.approx(2 / 3)


def test_topn_counts_capped_by_admissible():
    model, vocab = _uniform_model()
    # only two tokens have nonzero probability
    rec = predict_topn(model, ["a"], n=50, k=1)
    assert len(rec.items) == 2


def test_topn_validation_errors():
    model, vocab = _uniform_model()
    with pytest.raises(InvalidConfig):
        predict_topn(model, ["a"], n=0, k=1)
    with pytest.raises(InvalidConfig):
        predict_topn(model, ["a"], n=3, k=3)
    with pytest.raises(EmptyContext):
        predict_topn(model, [], n=3, k=1)


def test_ranked_ids_stable_tie_break():
    probs = np.array([[0.0, 0.0, 0.0, 0.25, 0.5, 0.25]])
    (ranked,) = ranked_ids(probs, 6)
    assert list(ranked) == [4, 3, 5]  # equal 0.25s -> ascending id
    (top1,) = ranked_ids(probs, 1)
    assert list(top1) == [4]


def test_ranked_ids_excludes_specials_and_zeros():
    probs = np.array([[0.9, 0.05, 0.05, 0.0, 0.0, 0.0]])  # mass only on specials
    (ranked,) = ranked_ids(probs, 6)
    assert list(ranked) == []


def test_topn_hits_membership():
    probs = np.array(
        [
            [0.0, 0.0, 0.0, 0.1, 0.7, 0.2],
            [0.0, 0.0, 0.0, 0.5, 0.3, 0.2],
        ]
    )
    gold = np.array([4, 5])
    assert list(topn_hits(probs, gold, 1)) == [True, False]
    assert list(topn_hits(probs, gold, 3)) == [True, True]


# ---------------------------------------------------------------------------
# beam exactness: beam >= |V| reproduces exhaustive enumeration
# ---------------------------------------------------------------------------


def brute_force_pairs(model, context, vocab, n):
    """All |V|^2 ordered pairs scored by product of step probabilities with
    greedy re-encoding, sorted by (-score, id1, id2) — fully independent of
    the beam implementation."""
    p1 = ngram_predict(model, list(context))
    cands = []
    for id1 in range(N_SPECIALS, len(vocab)):
        if p1[id1] <= 0.0:
            continue
        tok1 = vocab.decode(id1)
        p2 = ngram_predict(model, list(context) + [tok1])
        for id2 in range(N_SPECIALS, len(vocab)):
            if p2[id2] <= 0.0:
                continue
            cands.append((p1[id1] * p2[id2], id1, id2))
    cands.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [((vocab.decode(i1), vocab.decode(i2)), s) for s, i1, i2 in cands[:n]]


def test_beam_exactness_on_random_small_corpora():
    for case in range(12):
        n_tokens = 4 + case % 6  # |V| <= 12 real tokens
        proofs = random_proofs(
            seed=4200 + case, n_proofs=6 + case, n_tokens=n_tokens, min_len=4, max_len=10
        )
        pairs = build_pairs(proofs, context_min=3, k=1)
        if not pairs:
            continue
        vocab = build_vocab(pairs)
        model = ngram_fit(pairs, vocab, max_order=2)
        for ctx in [list(pairs[0].context), [vocab.tokens[0]], ["unseen-tok", vocab.tokens[-1]]]:
            n = 5 + case % 7
            (cands,) = pair_candidates(model, [ctx], n, 2, beam=len(vocab))
            got = [(tuple(vocab.decode(i) for i in ids), s) for ids, s in cands]
            want = brute_force_pairs(model, ctx, vocab, n)
            assert len(got) == len(want)
            for (gt, gs), (wt, ws) in zip(got, want):
                assert gt == wt
                assert gs == pytest.approx(ws, rel=1e-12)


def test_beam_default_width_is_max_n_8():
    model, vocab = _uniform_model()
    # n=1 -> beam 8 still explores both first tokens
    rec = predict_topn(model, ["a"], n=1, k=2)
    ((tactics, score),) = rec.items
    assert tuple(tactics) == ("x", "x")
    assert score == pytest.approx(0.36)


# ---------------------------------------------------------------------------
# step_probs on a trained checkpoint
# ---------------------------------------------------------------------------


def test_step_probs_checkpoint_rows_are_distributions():
    proofs = random_proofs(seed=31, n_proofs=40, n_tokens=6, min_len=4, max_len=9)
    pairs = build_pairs(proofs, context_min=3, k=1)
    split = split_dataset(pairs, ratio=0.9, seed=32)
    vocab = build_vocab(split.train)
    cfg = ModelConfig(
        window=12, embed_dim=16, heads=2, layers=1, ffn_dim=32, batch=16, epochs=2, seed=7
    )
    ck = tf_train(cfg, split.train, split.test, vocab)
    contexts = [list(p.context) for p in split.test[:5]]
    probs = step_probs(ck, contexts, vocab)
    assert probs.shape == (len(contexts), len(vocab))
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)
    rec = predict_topn(ck, contexts[0], n=3, k=1, vocab=vocab)
    assert len(rec.items) == 3
    scores = [s for _, s in rec.items]
    assert scores == sorted(scores, reverse=True)
    rec2 = predict_topn(ck, contexts[0], n=4, k=2, vocab=vocab)
    assert all(len(t) == 2 for t, _ in rec2.items)
