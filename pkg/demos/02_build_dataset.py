"""From tactic sequences to a train/test dataset of proof-state pairs.

A proof that applied tactics t1..tm becomes training signal by slicing:
every prefix of length >= context_min is a context, and the k tactics
that follow it are the label.  This script builds pairs from a small
seeded corpus, splits them, derives the vocabulary, and round-trips the
whole dataset through its on-disk format.

Run top to bottom: python3 demos/02_build_dataset.py
"""

import tempfile
from pathlib import Path

from tacrec import (
    SplitMix64,
    SplitMode,
    build_pairs,
    build_vocab,
    corpus_stats,
    load_dataset,
    persist_dataset,
    render_stats_table,
    split_dataset,
)

# ---------------------------------------------------------------------------
# A tiny synthetic corpus
# ---------------------------------------------------------------------------
# Real corpora come from the script parser (see demo 01).  For a quick,
# reproducible walkthrough we draw proofs from a seeded generator instead:
# 40 proofs of 6..14 tactics over an 8-name tactic inventory.

TACTICS = ["rw", "fs", "simp", "metis_tac", "strip_tac", "Induct", "Cases", "gvs"]
rng = SplitMix64(7)
proofs = [
    [TACTICS[rng.next_below(len(TACTICS))] for _ in range(6 + rng.next_below(9))]
    for _ in range(40)
]
print(f"corpus: {len(proofs)} proofs, lengths {min(map(len, proofs))}..{max(map(len, proofs))}")

# ---------------------------------------------------------------------------
# Slicing proofs into (context, next-k) pairs
# ---------------------------------------------------------------------------
# With context_min=3 and k=1, a 6-tactic proof contributes 3 pairs:
# prefix lengths 3, 4, 5, each labelled with the single next tactic.

pairs = build_pairs(proofs, context_min=3, k=1)
print(f"k=1 pairs: {len(pairs)}")
first = pairs[0]
print(f"  first pair: context={list(first.context)} -> label={list(first.label)}")

# The same corpus can be sliced for two-step lookahead (k=2); each proof
# then yields one fewer pair, since the label consumes two trailing tactics.
pairs_k2 = build_pairs(proofs, context_min=3, k=2)
print(f"k=2 pairs: {len(pairs_k2)}")

# ---------------------------------------------------------------------------
# Seeded train/test split
# ---------------------------------------------------------------------------
# The split is a deterministic function of (pairs, ratio, seed, mode).
# Pair-level scatters pairs freely; proof-level keeps each proof's pairs
# on one side, which is the honest setting for measuring generalisation.

split = split_dataset(pairs, ratio=0.9, seed=3)
print(f"\npair-level split: {len(split.train)} train / {len(split.test)} test")

by_proof = split_dataset(pairs, ratio=0.9, seed=3, mode=SplitMode.PROOF_LEVEL)
train_proofs = {p.proof_id for p in by_proof.train}
test_proofs = {p.proof_id for p in by_proof.test}
print(
    f"proof-level split: {len(by_proof.train)} train / {len(by_proof.test)} test, "
    f"shared proofs: {sorted(train_proofs & test_proofs)}"
)

# ---------------------------------------------------------------------------
# Vocabulary and corpus statistics
# ---------------------------------------------------------------------------
# The vocabulary is built from the train side only (test tokens the model
# never saw stay unknown, as they would in deployment).  Real tactics are
# ordered by descending train frequency, ties broken lexicographically;
# ids 0..2 are reserved for the padding/unknown/start markers.

vocab = build_vocab(split.train)
print(f"\nvocabulary: {len(vocab)} ids for {len(vocab.tokens)} tactics")
print(f"  most frequent first: {list(vocab.tokens[:5])} ...")
print(f"  digest: {vocab.digest:016x}")

stats = corpus_stats(proofs, pairs)
print()
print(render_stats_table(stats, "demo corpus"))

# ---------------------------------------------------------------------------
# Persisting and reloading
# ---------------------------------------------------------------------------
# A dataset directory holds the pair files, the vocabulary, and a manifest
# recording how the split was made (ratio, seed, mode, k, counts, digest).
# Writing is byte-deterministic, and loading verifies the manifest against
# the actual file contents.

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp) / "dataset"
    persist_dataset(split, vocab, out, context_min=3, stats=stats)
    print(f"wrote: {sorted(p.name for p in out.iterdir())}")

    reloaded, vocab2 = load_dataset(out)
    assert vocab2.digest == vocab.digest
    assert reloaded.train == split.train and reloaded.test == split.test
    print("reload: splits and vocabulary match exactly")
