"""The n-gram backoff baseline: exact counting, no learning.

Before reaching for a neural model it is worth knowing how far plain
conditional frequencies go.  The baseline counts, for every context
suffix up to a maximum order, which tactic followed it in training --
and predicts by the longest suffix it has seen ("stupid backoff").

Run top to bottom: python3 demos/03_ngram_baseline.py
"""

from tacrec import (
    SplitMix64,
    build_pairs,
    build_vocab,
    n_correctness,
    ngram_fit,
    ngram_predict,
    predict_topn,
    split_dataset,
)

# The same seeded corpus as demo 02, so numbers line up across demos.
TACTICS = ["rw", "fs", "simp", "metis_tac", "strip_tac", "Induct", "Cases", "gvs"]
rng = SplitMix64(7)
proofs = [
    [TACTICS[rng.next_below(len(TACTICS))] for _ in range(6 + rng.next_below(9))]
    for _ in range(40)
]
split = split_dataset(build_pairs(proofs, context_min=3, k=1), ratio=0.9, seed=3)
vocab = build_vocab(split.train)

# ---------------------------------------------------------------------------
# Fitting is counting
# ---------------------------------------------------------------------------
# For max_order=2 the model keeps three tables: counts conditioned on the
# last two tactics, on the last one, and on nothing (label frequencies).

model = ngram_fit(split.train, vocab, max_order=2)
print(f"model: {model.name}")
print(f"distinct context suffixes counted: {len(model.counts)}")
print(f"unconditional label counts (order 0): {dict(sorted(model.counts[()].items()))}")

# ---------------------------------------------------------------------------
# Backoff in action
# ---------------------------------------------------------------------------
# Prediction uses the longest counted suffix of the query context.  A
# context ending in a pair the training set never produced falls back to
# the last single tactic, and ultimately to the unconditional counts.

context = list(split.test[0].context)
print(f"\nquery context (last 4 shown): ...{context[-4:]}")
probs = ngram_predict(model, context)
top = sorted(enumerate(probs), key=lambda t: -t[1])[:3]
for tok_id, p in top:
    print(f"  P({vocab.decode(tok_id)}) = {p:.4f}")

# predict_topn wraps the same distribution as ranked (tactic, score) items.
rec = predict_topn(model, context, n=3)
print(f"top-3 recommendation: {[(t[0], round(s, 4)) for t, s in rec.items]}")

# With k=2 the model ranks ordered *pairs* of next tactics by the product
# of step scores, extending each first step with its best continuations.
rec2 = predict_topn(model, context, n=3, k=2)
print(f"top-3 two-step plans: {[(' ; '.join(t), round(s, 4)) for t, s in rec2.items]}")

# ---------------------------------------------------------------------------
# Scoring with the n-correctness rate
# ---------------------------------------------------------------------------
# A test pair counts as a hit when its true next tactic appears among the
# model's top n suggestions.  The rate can only grow with n.

for n in (1, 3, 7):
    rate = n_correctness(model, split.test, n=n, k=1)
    print(f"n={n}: {rate:.3f}")

# The corpus here is uniform noise, so these rates hover near the best
# constant guess -- exactly the point of a baseline.  On real proof
# corpora, tactic choice is strongly conditioned on recent history and
# the same counts become a surprisingly strong floor (see demo 04 for
# the comparison against the trained encoder).
