"""Next-tactic recommendation toolkit for theorem-prover proof scripts.

Pipeline: parse ``*Script.sml`` theory files into per-proof tactic
sequences, restructure them into (growing context, next-k tactics) pairs,
train either an exact n-gram backoff baseline or a small attention-based
classifier, evaluate with the n-correctness rate, and serve ranked
recommendations over HTTP.
"""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .corpus import (
    CLS,
    PAD,
    UNK,
    CorpusStats,
    DatasetSplit,
    ProofStatePair,
    SplitMode,
    Vocabulary,
    build_pairs,
    build_vocab,
    corpus_stats,
    load_dataset,
    persist_dataset,
    render_stats_table,
    split_dataset,
)
from .errors import TacrecError
from .evaluate import EvalReport, evaluate_suite, n_correctness, render_eval_table
from .ngram import NgramModel, ngram_fit, ngram_predict
from .predict import Recommendation, predict_topn
from .rng import SplitMix64
from .script_parser import (
    DeclForm,
    ProofRecord,
    extract_proofs,
    flatten_tactic_expr,
    read_records,
    scan_corpus,
    write_records,
)
from .training import default_grid, grid_search, tf_train
from .transformer import ModelConfig, encode_context

__version__ = "0.1.0"

__all__ = [
    "Checkpoint",
    "CorpusStats",
    "DatasetSplit",
    "DeclForm",
    "EvalReport",
    "ModelConfig",
    "NgramModel",
    "ProofRecord",
    "ProofStatePair",
    "Recommendation",
    "SplitMix64",
    "SplitMode",
    "TacrecError",
    "Vocabulary",
    "PAD",
    "UNK",
    "CLS",
    "build_pairs",
    "build_vocab",
    "corpus_stats",
    "encode_context",
    "evaluate_suite",
    "extract_proofs",
    "flatten_tactic_expr",
    "default_grid",
    "grid_search",
    "load_checkpoint",
    "load_dataset",
    "n_correctness",
    "ngram_fit",
    "ngram_predict",
    "persist_dataset",
    "predict_topn",
    "read_records",
    "render_eval_table",
    "render_stats_table",
    "save_checkpoint",
    "scan_corpus",
    "split_dataset",
    "tf_train",
    "write_records",
]
