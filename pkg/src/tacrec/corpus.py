"""Proof-state dataset construction: pairs, splits, vocabulary, persistence.

A proof with tactics ``t1..tm`` yields one training example per growing
prefix: the context is the full prefix ``t1..tj`` and the label is the next
``k`` tactics.  Contexts are never truncated here; windowing to the model's
input length happens at encoding time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import CorruptDataset, EmptyDataset, InvalidConfig, IoError
from .rng import SplitMix64
from .script_parser import ProofRecord

MANIFEST_VERSION = "tacrec-dataset-1"

PAD, UNK, CLS = 0, 1, 2
N_SPECIALS = 3

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = (1 << 64) - 1


def fnv1a64(chunks: list[bytes]) -> int:
    """64-bit FNV-1a over a sequence of byte chunks (chunk boundaries hashed)."""
    h = _FNV_OFFSET
    for chunk in chunks:
        for b in chunk:
            h = ((h ^ b) * _FNV_PRIME) & _U64
        h = ((h ^ 0x0A) * _FNV_PRIME) & _U64
    return h


@dataclass(frozen=True)
class ProofStatePair:
    """A current proof state (context) and the next-k gold tactics."""

    context: tuple[str, ...]
    label: tuple[str, ...]
    proof_id: int
    offset: int  # position of the first label token within the proof


class SplitMode(str, Enum):
    PAIR_LEVEL = "pair"
    PROOF_LEVEL = "proof"


@dataclass
class DatasetSplit:
    train: list[ProofStatePair]
    test: list[ProofStatePair]
    ratio: float
    seed: int
    mode: SplitMode


class Vocabulary:
    """Bijection between tactic tokens and dense integer ids.

    Ids 0..2 are reserved (PAD, UNK, CLS); real tokens start at 3 in the
    order given.  The digest is a content hash of the token->id mapping.
    """

    def __init__(self, tokens: list[str] | tuple[str, ...]):
        self.tokens = tuple(tokens)
        if len(set(self.tokens)) != len(self.tokens):
            raise InvalidConfig("vocabulary tokens must be distinct")
        self.id_of = {tok: i + N_SPECIALS for i, tok in enumerate(self.tokens)}
        self.digest = fnv1a64([tok.encode("utf-8") for tok in self.tokens])

    def __len__(self) -> int:
        return N_SPECIALS + len(self.tokens)

    def encode(self, token: str) -> int:
        return self.id_of.get(token, UNK)

    def decode(self, token_id: int) -> str:
        if token_id < N_SPECIALS:
            return ("<pad>", "<unk>", "<cls>")[token_id]
        return self.tokens[token_id - N_SPECIALS]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens


@dataclass(frozen=True)
class CorpusStats:
    distinct_tactics: int
    proofs: int
    proof_states: int


def build_pairs(
    proofs: list[ProofRecord] | list[tuple[str, ...]] | list[list[str]],
    context_min: int = 3,
    k: int = 1,
) -> list[ProofStatePair]:
    """Emit (growing-prefix context, next-k label) pairs for every proof.

    ``proofs`` may be ProofRecords or bare tactic sequences.  Proof ``i``
    with ``m`` tactics contributes pairs for every split point ``j`` in
    ``[context_min, m-k]``, in order.
    """
    if k < 1 or context_min < 1:
        raise InvalidConfig("k and context_min must be >= 1")
    pairs: list[ProofStatePair] = []
    for pid, proof in enumerate(proofs):
        tactics = tuple(proof.tactics) if isinstance(proof, ProofRecord) else tuple(proof)
        m = len(tactics)
        for j in range(context_min, m - k + 1):
            pairs.append(ProofStatePair(tactics[:j], tactics[j : j + k], pid, j))
    return pairs


def expected_pair_count(proof_lengths: list[int], context_min: int, k: int) -> int:
    return sum(max(0, m - context_min - k + 1) for m in proof_lengths)


def split_dataset(
    pairs: list[ProofStatePair],
    ratio: float = 0.9,
    seed: int = 0,
    mode: SplitMode = SplitMode.PAIR_LEVEL,
) -> DatasetSplit:
    """Deterministic seeded train/test split.

    Pair-level: shuffle pairs, put the first ``round(ratio * total)`` in
    train.  Proof-level: no proof's pairs are split across sides; the train
    side is the smallest achievable pair count >= ``ratio * total``, with
    membership decided by the seeded shuffle order.
    """
    if not pairs:
        raise EmptyDataset("no pairs to split")
    if not (0.0 < ratio < 1.0):
        raise InvalidConfig("ratio must be in (0, 1)")
    stream = SplitMix64(seed)
    if mode == SplitMode.PAIR_LEVEL:
        order = list(range(len(pairs)))
        stream.shuffle(order)
        train_size = int(math.floor(ratio * len(pairs) + 0.5))
        train = [pairs[i] for i in order[:train_size]]
        test = [pairs[i] for i in order[train_size:]]
        return DatasetSplit(train, test, ratio, seed, mode)
    return _split_by_proof(pairs, ratio, seed, stream)


def _split_by_proof(
    pairs: list[ProofStatePair], ratio: float, seed: int, stream: SplitMix64
) -> DatasetSplit:
    counts: dict[int, int] = {}
    for p in pairs:
        counts[p.proof_id] = counts.get(p.proof_id, 0) + 1
    pids = sorted(counts)
    stream.shuffle(pids)
    total = len(pairs)
    threshold = ratio * total

    # Achievable pair-count sums over each suffix of the shuffled proofs,
    # as bitmasks; ach[i] covers proofs pids[i:].
    ach = [0] * (len(pids) + 1)
    ach[len(pids)] = 1
    for i in range(len(pids) - 1, -1, -1):
        mask = ach[i + 1]
        ach[i] = mask | (mask << counts[pids[i]])
    target = None
    for s in range(math.ceil(threshold), total + 1):
        if (ach[0] >> s) & 1:
            target = s
            break
    if target is None:  # unreachable: the full set always qualifies
        raise InvalidConfig("no achievable proof-level split")

    need = target
    train_pids: set[int] = set()
    for i, pid in enumerate(pids):
        c = counts[pid]
        if c <= need and (ach[i + 1] >> (need - c)) & 1:
            train_pids.add(pid)
            need -= c
    train = [p for p in pairs if p.proof_id in train_pids]
    test = [p for p in pairs if p.proof_id not in train_pids]
    return DatasetSplit(train, test, ratio, seed, SplitMode.PROOF_LEVEL)


def build_vocab(train: list[ProofStatePair]) -> Vocabulary:
    """Vocabulary over all train tokens, most frequent first, ties by name."""
    if not train:
        raise EmptyDataset("cannot build a vocabulary from no pairs")
    freq: dict[str, int] = {}
    for pair in train:
        for tok in pair.context:
            freq[tok] = freq.get(tok, 0) + 1
        for tok in pair.label:
            freq[tok] = freq.get(tok, 0) + 1
    ordered = sorted(freq, key=lambda t: (-freq[t], t))
    return Vocabulary(ordered)


def corpus_stats(
    proofs: list[ProofRecord] | list[tuple[str, ...]] | list[list[str]],
    pairs: list[ProofStatePair],
) -> CorpusStats:
    tokens: set[str] = set()
    nonempty = 0
    for proof in proofs:
        tactics = proof.tactics if isinstance(proof, ProofRecord) else proof
        if len(tactics) > 0:
            nonempty += 1
        tokens.update(tactics)
    return CorpusStats(len(tokens), nonempty, len(pairs))


def render_stats_table(stats: CorpusStats, dataset_name: str) -> str:
    rows = [
        ("Distinct Tactics", stats.distinct_tactics),
        ("Proofs", stats.proofs),
        ("Proof States", stats.proof_states),
    ]
    label_w = max(len(r[0]) for r in rows)
    value_w = max(len(f"{r[1]:,}") for r in rows + [("", 0)])
    value_w = max(value_w, len(dataset_name))
    lines = [f"{'':<{label_w}}  {dataset_name:>{value_w}}"]
    for label, value in rows:
        lines.append(f"{label:<{label_w}}  {value:>{value_w},}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Persistence


def _pair_line(pair: ProofStatePair) -> str:
    return "\t".join(
        (
            str(pair.proof_id),
            str(pair.offset),
            " ".join(pair.context),
            " ".join(pair.label),
        )
    )


def _parse_pair_line(line: str) -> ProofStatePair:
    parts = line.split("\t")
    if len(parts) != 4:
        raise CorruptDataset(f"bad pair record: {line!r}")
    try:
        proof_id, offset = int(parts[0]), int(parts[1])
    except ValueError as e:
        raise CorruptDataset(f"bad pair record: {line!r}") from e
    context = tuple(parts[2].split())
    label = tuple(parts[3].split())
    return ProofStatePair(context, label, proof_id, offset)


def persist_dataset(
    split: DatasetSplit,
    vocab: Vocabulary,
    path: str | Path,
    context_min: int = 3,
    stats: CorpusStats | None = None,
) -> None:
    """Write the dataset directory: manifest, vocab, train.pairs, test.pairs."""
    path = Path(path)
    if not split.train:
        raise EmptyDataset("empty train split")
    k = len(split.train[0].label)
    manifest = {
        "version": MANIFEST_VERSION,
        "ratio": split.ratio,
        "seed": split.seed,
        "mode": split.mode.value,
        "context_min": context_min,
        "k": k,
        "counts": {
            "train_pairs": len(split.train),
            "test_pairs": len(split.test),
            "proofs": stats.proofs if stats else None,
            "distinct_tactics": stats.distinct_tactics if stats else None,
        },
        "vocab_digest": f"{vocab.digest:016x}",
    }
    try:
        path.mkdir(parents=True, exist_ok=True)
        (path / "manifest").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        (path / "vocab").write_text(
            "".join(tok + "\n" for tok in vocab.tokens), encoding="utf-8"
        )
        for name, pairs in (("train.pairs", split.train), ("test.pairs", split.test)):
            (path / name).write_text(
                "".join(_pair_line(p) + "\n" for p in pairs), encoding="utf-8"
            )
    except OSError as e:
        raise IoError(f"cannot write dataset to {path}: {e}") from e


def read_manifest(path: str | Path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads((path / "manifest").read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"cannot read dataset manifest in {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise CorruptDataset(f"manifest is not valid JSON: {e}") from e
    if manifest.get("version") != MANIFEST_VERSION:
        raise CorruptDataset(f"unknown dataset version: {manifest.get('version')!r}")
    return manifest


def load_dataset(path: str | Path) -> tuple[DatasetSplit, Vocabulary]:
    """Exact inverse of persist_dataset; digest- and count-checked."""
    path = Path(path)
    manifest = read_manifest(path)
    try:
        vocab_lines = (path / "vocab").read_text(encoding="utf-8").splitlines()
        vocab = Vocabulary([line for line in vocab_lines if line])
    except OSError as e:
        raise IoError(f"cannot read vocab in {path}: {e}") from e
    if f"{vocab.digest:016x}" != manifest.get("vocab_digest"):
        raise CorruptDataset("vocabulary digest does not match manifest")

    k = manifest["k"]
    context_min = manifest["context_min"]
    sides = {}
    for name in ("train.pairs", "test.pairs"):
        try:
            lines = (path / name).read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise IoError(f"cannot read {name} in {path}: {e}") from e
        pairs = [_parse_pair_line(line) for line in lines if line]
        for p in pairs:
            if len(p.label) != k or len(p.context) < context_min:
                raise CorruptDataset(f"pair violates manifest shape in {name}")
        sides[name] = pairs
    counts = manifest["counts"]
    if len(sides["train.pairs"]) != counts["train_pairs"] or len(
        sides["test.pairs"]
    ) != counts["test_pairs"]:
        raise CorruptDataset("pair counts do not match manifest")
    split = DatasetSplit(
        train=sides["train.pairs"],
        test=sides["test.pairs"],
        ratio=manifest["ratio"],
        seed=manifest["seed"],
        mode=SplitMode(manifest["mode"]),
    )
    return split, vocab
