"""n-correctness evaluation of next-tactic predictors.

A test pair counts as a hit at n when its full ordered gold k-sequence
appears among the top-n recommended k-sequences (the strict reading for
k=2).  Gold sequences containing out-of-vocabulary tokens are misses by
construction (the predictor cannot emit them) and are tallied separately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .checkpoint import Checkpoint
from .corpus import UNK, ProofStatePair, Vocabulary
from .errors import EmptyDataset, InvalidConfig
from .ngram import NgramModel
from .predict import pair_candidates


@dataclass
class EvalReport:
    dataset_name: str
    predictor_name: str
    rows: dict[int, dict[int, float]] = field(default_factory=dict)
    hit_counts: dict[int, dict[int, int]] = field(default_factory=dict)
    pair_counts: dict[int, int] = field(default_factory=dict)
    oov_counts: dict[int, int] = field(default_factory=dict)


def _predictor_name(predictor) -> str:
    name = getattr(predictor, "name", None)
    return name if isinstance(name, str) else type(predictor).__name__


def _candidate_lists(predictor, pairs, n_max: int, k: int, vocab: Vocabulary | None):
    """Ranked candidate tactic tuples per pair, truncated at n_max."""
    contexts = [list(p.context) for p in pairs]
    if isinstance(predictor, (Checkpoint, NgramModel)):
        resolved = predictor.vocab if isinstance(predictor, NgramModel) else vocab
        if resolved is None:
            raise InvalidConfig("a vocabulary is required to evaluate a checkpoint")
        id_lists = pair_candidates(predictor, contexts, n_max, k, vocab=vocab)
        return [
            [tuple(resolved.decode(i) for i in ids) for ids, _ in cands]
            for cands in id_lists
        ]
    # rigged/test predictors supply predict_topn(context, n, k) themselves
    lists = []
    for ctx in contexts:
        rec = predictor.predict_topn(ctx, n_max, k)
        items = rec.items if hasattr(rec, "items") and not isinstance(rec, list) else rec
        lists.append([tuple(tactics) for tactics, _ in items][:n_max])
    return lists


def _check_pairs(pairs: list[ProofStatePair], k: int) -> None:
    if not pairs:
        raise EmptyDataset("cannot evaluate on an empty test set")
    if any(len(p.label) != k for p in pairs):
        raise InvalidConfig(f"expected every test label to have length {k}")


def hits_grid(
    predictor,
    pairs: list[ProofStatePair],
    ns: list[int],
    k: int,
    vocab: Vocabulary | None = None,
) -> tuple[dict[int, int], int]:
    """Hit counts per n (one candidate computation) and the OOV-gold count."""
    _check_pairs(pairs, k)
    if any(n < 1 for n in ns):
        raise InvalidConfig("every n must be >= 1")
    n_max = max(ns)
    cands = _candidate_lists(predictor, pairs, n_max, k, vocab)
    oov = 0
    if vocab is not None:
        oov = sum(
            1 for p in pairs if any(vocab.encode(t) == UNK for t in p.label)
        )
    elif isinstance(predictor, NgramModel):
        oov = sum(
            1
            for p in pairs
            if any(predictor.vocab.encode(t) == UNK for t in p.label)
        )
    hits = {n: 0 for n in ns}
    for p, ranked in zip(pairs, cands):
        gold = tuple(p.label)
        try:
            rank = ranked.index(gold)
        except ValueError:
            continue
        for n in ns:
            if rank < n:
                hits[n] += 1
    return hits, oov


def n_correctness(
    predictor,
    pairs: list[ProofStatePair],
    n: int,
    k: int,
    vocab: Vocabulary | None = None,
) -> float:
    hits, _ = hits_grid(predictor, pairs, [n], k, vocab)
    return hits[n] / len(pairs)


def evaluate_suite(
    predictor,
    test_by_k: dict[int, list[ProofStatePair]],
    ns: list[int] = (3, 7, 10),
    ks: list[int] = (1, 2),
    dataset_name: str = "test",
    vocab: Vocabulary | None = None,
) -> EvalReport:
    report = EvalReport(dataset_name=dataset_name, predictor_name=_predictor_name(predictor))
    for k in ks:
        if k not in test_by_k:
            raise InvalidConfig(f"no test pairs supplied for k={k}")
        pairs = test_by_k[k]
        hits, oov = hits_grid(predictor, pairs, list(ns), k, vocab)
        report.pair_counts[k] = len(pairs)
        report.oov_counts[k] = oov
        report.hit_counts[k] = hits
        report.rows[k] = {n: hits[n] / len(pairs) for n in ns}
    return report


def render_eval_table(report: EvalReport) -> str:
    """Text table: one row per k, one column per n, one-decimal percents."""
    ks = sorted(report.rows)
    ns = sorted(next(iter(report.rows.values()))) if report.rows else []
    headers = [f"n = {n}" for n in ns]
    label_w = max(len(f"k = {k}") for k in ks) + 2
    col_w = max([len(h) for h in headers] + [7])
    lines = [
        f"n-Correctness Rates of {report.predictor_name} (dataset: {report.dataset_name})",
        "hit rule: the full ordered k-sequence must appear in the top-n list",
        "",
        " " * label_w + " | " + " | ".join(h.rjust(col_w) for h in headers),
    ]
    for k in ks:
        cells = [f"{report.rows[k][n] * 100:.1f}%".rjust(col_w) for n in ns]
        lines.append(f"k = {k}".rjust(label_w) + " | " + " | ".join(cells))
    oov = ", ".join(
        f"k={k}: {report.oov_counts[k]} of {report.pair_counts[k]}" for k in ks
    )
    lines.extend(["", f"out-of-vocabulary gold sequences: {oov}"])
    return "\n".join(lines) + "\n"


def eval_records(report: EvalReport) -> str:
    """Line-delimited records, one JSON object per (k, n) cell."""
    lines = []
    for k in sorted(report.rows):
        for n in sorted(report.rows[k]):
            lines.append(
                json.dumps(
                    {
                        "k": k,
                        "n": n,
                        "hits": report.hit_counts[k][n],
                        "total": report.pair_counts[k],
                        "rate": report.rows[k][n],
                    },
                    sort_keys=True,
                )
            )
    return "\n".join(lines) + "\n"
