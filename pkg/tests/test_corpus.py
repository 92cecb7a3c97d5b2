"""Proof-state pair construction, splits, vocabulary, stats, persistence."""

import dataclasses
import itertools
import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mk_pair, random_proofs
from tacrec.corpus import (
    CLS,
    PAD,
    UNK,
    CorpusStats,
    SplitMode,
    Vocabulary,
    build_pairs,
    build_vocab,
    corpus_stats,
    expected_pair_count,
    load_dataset,
    persist_dataset,
    read_manifest,
    render_stats_table,
    split_dataset,
)
from tacrec.errors import CorruptDataset, EmptyDataset, InvalidConfig

# ---------------------------------------------------------------------------
# build_pairs
# ---------------------------------------------------------------------------


def test_build_pairs_basic_k1():
    pairs = build_pairs([["a", "b", "c", "d", "e"]], context_min=3, k=1)
    assert [(list(p.context), list(p.label)) for p in pairs] == [
        (["a", "b", "c"], ["d"]),
        (["a", "b", "c", "d"], ["e"]),
    ]


def test_build_pairs_too_short_yields_none():
    assert build_pairs([["a", "b", "c"]], context_min=3, k=1) == []


def test_build_pairs_k2_single_pair():
    pairs = build_pairs([["a", "b", "c", "d", "e"]], context_min=3, k=2)
    assert [(list(p.context), list(p.label)) for p in pairs] == [
        (["a", "b", "c"], ["d", "e"]),
    ]


def test_build_pairs_rejects_zero_config():
    with pytest.raises(InvalidConfig):
        build_pairs([["a", "b", "c", "d"]], context_min=0, k=1)
    with pytest.raises(InvalidConfig):
        build_pairs([["a", "b", "c", "d"]], context_min=3, k=0)


def test_build_pairs_order_and_ids():
    pairs = build_pairs([["a", "b", "c", "d"], ["x", "y", "z", "w", "v"]], context_min=3, k=1)
    assert [(p.proof_id, p.offset) for p in pairs] == [(0, 3), (1, 3), (1, 4)]


def test_pair_count_formula_on_200_random_corpora():
    """|build_pairs| == sum of max(0, m_i - c - k + 1), exactly, for three
    (context_min, k) settings across 200 random corpora with lengths 1-40."""
    for case in range(200):
        proofs = random_proofs(seed=1000 + case, n_proofs=1 + case % 17, min_len=1, max_len=40)
        lengths = [len(p) for p in proofs]
        for c, k in [(3, 1), (3, 2), (5, 1)]:
            got = len(build_pairs(proofs, context_min=c, k=k))
            assert got == expected_pair_count(lengths, c, k)
            assert got == sum(max(0, m - c - k + 1) for m in lengths)


@given(
    st.lists(
        st.lists(st.sampled_from("abcdef"), min_size=1, max_size=40), min_size=1, max_size=12
    ),
    st.integers(1, 5),
    st.integers(1, 2),
)
@settings(max_examples=80, deadline=None)
def test_prefix_property(proofs, c, k):
    """context ++ label always equals the proof's first |context|+k tactics."""
    pairs = build_pairs(proofs, context_min=c, k=k)
    for p in pairs:
        proof = proofs[p.proof_id]
        assert list(p.context) + list(p.label) == proof[: len(p.context) + k]
        assert len(p.context) >= c and len(p.label) == k


# ---------------------------------------------------------------------------
# split_dataset
# ---------------------------------------------------------------------------


def _pairs_n(n):
    return [mk_pair([f"c{i}", "x", "y"], [f"l{i}"], proof_id=i) for i in range(n)]


def test_pair_level_split_10():
    split = split_dataset(_pairs_n(10), ratio=0.9, seed=4)
    assert len(split.train) == 9 and len(split.test) == 1


def test_pair_level_split_1000_disjoint_and_reproducible():
    pairs = _pairs_n(1000)
    s1 = split_dataset(pairs, ratio=0.9, seed=7)
    s2 = split_dataset(pairs, ratio=0.9, seed=7)
    assert len(s1.train) == 900 and len(s1.test) == 100
    train_ids = {id(p) for p in s1.train}
    test_ids = {id(p) for p in s1.test}
    assert not (train_ids & test_ids)
    assert set(map(repr, s1.train)) | set(map(repr, s1.test)) == set(map(repr, pairs))
    assert s1.train == s2.train and s1.test == s2.test
    s3 = split_dataset(pairs, ratio=0.9, seed=8)
    assert s3.train != s1.train  # different seed shuffles differently


def test_proof_level_split_example():
    """Proofs with pair counts [5,3,1,1]: the train side must hold whole
    proofs totalling the smallest achievable count >= 9 — which is exactly 9."""
    proofs = [
        ["a"] * 8,  # 5 pairs at c=3,k=1
        ["b"] * 6,  # 3 pairs
        ["c"] * 4,  # 1 pair
        ["d"] * 4,  # 1 pair
    ]
    pairs = build_pairs(proofs, context_min=3, k=1)
    assert [sum(1 for p in pairs if p.proof_id == i) for i in range(4)] == [5, 3, 1, 1]
    for seed in range(10):
        split = split_dataset(pairs, ratio=0.9, seed=seed, mode=SplitMode.PROOF_LEVEL)
        train_proofs = {p.proof_id for p in split.train}
        test_proofs = {p.proof_id for p in split.test}
        assert not (train_proofs & test_proofs)
        assert len(split.train) == 9


@given(st.integers(0, 2**32), st.integers(2, 60))
@settings(max_examples=60, deadline=None)
def test_proof_level_never_splits_a_proof(seed, n_proofs):
    proofs = random_proofs(seed=seed % 997, n_proofs=n_proofs, min_len=4, max_len=12)
    pairs = build_pairs(proofs, context_min=3, k=1)
    if not pairs:
        return
    split = split_dataset(pairs, ratio=0.9, seed=seed, mode=SplitMode.PROOF_LEVEL)
    assert not ({p.proof_id for p in split.train} & {p.proof_id for p in split.test})
    assert len(split.train) + len(split.test) == len(pairs)
    total = len(pairs)
    if split.test:  # train is the smallest achievable count >= ratio * total
        assert len(split.train) >= 0.9 * total


def test_split_empty_raises():
    with pytest.raises(EmptyDataset):
        split_dataset([], ratio=0.9, seed=0)


def test_split_bad_ratio():
    with pytest.raises(InvalidConfig):
        split_dataset(_pairs_n(10), ratio=1.0, seed=0)
    with pytest.raises(InvalidConfig):
        split_dataset(_pairs_n(10), ratio=0.0, seed=0)


# ---------------------------------------------------------------------------
# Vocabulary
# ---------------------------------------------------------------------------


def test_vocab_ordering_example():
    pairs = [
        mk_pair(["rw", "rw", "rw"], ["rw"]),  # rw x4
        mk_pair(["rw", "fs"], ["fs"]),  # rw x1, fs x2
        mk_pair(["simp"], ["simp"]),  # simp x2
    ]
    vocab = build_vocab(pairs)
    assert vocab.encode("rw") == 3  # highest frequency (5)
    assert vocab.encode("fs") == 4  # tie at 2 -> lexicographic: fs < simp
    assert vocab.encode("simp") == 5
    assert (PAD, UNK, CLS) == (0, 1, 2)
    assert [vocab.decode(i) for i in range(3)] == ["<pad>", "<unk>", "<cls>"]
    assert len(vocab) == 6  # three specials + three tokens


def test_vocab_unknown_encodes_to_unk():
    vocab = build_vocab([mk_pair(["a", "b", "c"], ["d"])])
    assert vocab.encode("never-seen") == UNK
    assert vocab.encode("a") >= 3


def test_vocab_digest_deterministic():
    pairs = [mk_pair(["a", "b", "c"], ["d"]), mk_pair(["b", "c", "d"], ["a"])]
    v1 = build_vocab(pairs)
    v2 = build_vocab(list(pairs))
    assert v1.digest == v2.digest
    assert v1 == v2
    v3 = build_vocab([mk_pair(["zz", "b", "c"], ["d"])])  # different token set
    assert v3.digest != v1.digest
    # digest depends on id order, not just membership
    v4 = Vocabulary(("b", "a"))
    v5 = Vocabulary(("a", "b"))
    assert v4.digest != v5.digest


def test_vocab_empty_raises():
    with pytest.raises(EmptyDataset):
        build_vocab([])


def test_vocab_roundtrip_encode_decode():
    vocab = build_vocab([mk_pair(["al", "be", "ga"], ["de"])])
    for tok in ["al", "be", "ga", "de"]:
        assert vocab.decode(vocab.encode(tok)) == tok


# ---------------------------------------------------------------------------
# corpus_stats and the stats table
# ---------------------------------------------------------------------------


def test_corpus_stats_two_proof_example():
    proofs = [["a", "b", "c", "d"], ["a", "b", "c"]]
    pairs = build_pairs(proofs, context_min=3, k=1)
    stats = corpus_stats(proofs, pairs)
    assert stats == CorpusStats(distinct_tactics=4, proofs=2, proof_states=1)


def test_corpus_stats_empty():
    assert corpus_stats([], []) == CorpusStats(0, 0, 0)


def test_stats_table_row_structure():
    table = render_stats_table(CorpusStats(162, 5136, 116156), "Dataset 7")
    lines = [ln for ln in table.splitlines() if ln.strip()]
    labels = [ln.split("  ")[0].strip() for ln in lines[1:]]
    assert labels == ["Distinct Tactics", "Proofs", "Proof States"]
    assert "5,136" in table and "116,156" in table and "162" in table
    assert "Dataset 7" in lines[0]


# ---------------------------------------------------------------------------
# persist / load
# ---------------------------------------------------------------------------


def _small_split_and_vocab(seed=3):
    proofs = random_proofs(seed=seed, n_proofs=30, min_len=4, max_len=10)
    pairs = build_pairs(proofs, context_min=3, k=1)
    split = split_dataset(pairs, ratio=0.9, seed=seed)
    return split, build_vocab(split.train)


def test_persist_roundtrip(tmp_path):
    split, vocab = _small_split_and_vocab()
    out = tmp_path / "ds"
    persist_dataset(split, vocab, out)
    split2, vocab2 = load_dataset(out)
    assert split2.train == split.train
    assert split2.test == split.test
    assert vocab2 == vocab
    assert vocab2.digest == vocab.digest
    assert (split2.ratio, split2.seed, split2.mode) == (split.ratio, split.seed, split.mode)


def test_persist_is_byte_deterministic(tmp_path):
    split, vocab = _small_split_and_vocab()
    a, b = tmp_path / "a", tmp_path / "b"
    persist_dataset(split, vocab, a)
    persist_dataset(split, vocab, b)
    for name in ["manifest", "vocab", "train.pairs", "test.pairs"]:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_load_detects_tampered_record_count(tmp_path):
    split, vocab = _small_split_and_vocab()
    out = tmp_path / "ds"
    persist_dataset(split, vocab, out)
    lines = (out / "train.pairs").read_text(encoding="utf-8").splitlines(keepends=True)
    (out / "train.pairs").write_text("".join(lines[:-1]), encoding="utf-8")
    with pytest.raises(CorruptDataset):
        load_dataset(out)


def test_load_detects_vocab_tamper(tmp_path):
    split, vocab = _small_split_and_vocab()
    out = tmp_path / "ds"
    persist_dataset(split, vocab, out)
    vtext = (out / "vocab").read_text(encoding="utf-8")
    (out / "vocab").write_text(vtext.replace(vocab.tokens[3], "swapped-token"), encoding="utf-8")
    with pytest.raises(CorruptDataset):
        load_dataset(out)


def test_load_rejects_unknown_manifest_version(tmp_path):
    split, vocab = _small_split_and_vocab()
    out = tmp_path / "ds"
    persist_dataset(split, vocab, out)
    manifest = json.loads((out / "manifest").read_text(encoding="utf-8"))
    manifest["version"] = "tacrec-dataset-999"
    (out / "manifest").write_text(json.dumps(manifest), encoding="utf-8")
    with pytest.raises(CorruptDataset):
        load_dataset(out)


def test_manifest_records_parameters(tmp_path):
    split, vocab = _small_split_and_vocab()
    out = tmp_path / "ds"
    persist_dataset(split, vocab, out, context_min=3)
    man = read_manifest(out)
    assert man["version"]
    assert man["ratio"] == split.ratio
    assert man["seed"] == split.seed
    assert man["mode"] == split.mode.value
    assert man["k"] == 1
    assert man["counts"]["train_pairs"] == len(split.train)
    assert man["counts"]["test_pairs"] == len(split.test)
    assert man["vocab_digest"] == f"{vocab.digest:016x}"
