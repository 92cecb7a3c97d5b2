"""Command-line pipeline: extract, build, stats, train, grid, eval,
recommend, serve.

Exit codes: 0 success, 1 usage error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import corpus as cp
from . import script_parser as sp
from .checkpoint import (
    Checkpoint,
    load_checkpoint,
    load_vocab_sidecar,
    save_checkpoint,
    save_vocab_sidecar,
)
from .errors import InvalidConfig, TacrecError
from .evaluate import eval_records, evaluate_suite, render_eval_table
from .ngram import ngram_fit
from .predict import predict_topn
from .service import DEFAULT_ADDR, create_server
from .training import default_grid, grid_search, tf_train
from .transformer import ModelConfig

VAL_FRACTION = 0.1  # of the train split, held out for model selection


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tacrec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("extract", help="scan *Script.sml files into a proof record file")
    p.add_argument("dir", help="corpus root to scan recursively")
    p.add_argument("-o", "--output", required=True, help="output records file (JSON lines)")

    p = sub.add_parser("build", help="build a train/test dataset from proof records")
    p.add_argument("proofs", help="records file produced by extract")
    p.add_argument("-o", "--output", required=True, help="dataset directory to write")
    p.add_argument("--k", type=int, default=1, help="label length (default 1)")
    p.add_argument("--context-min", type=int, default=3, help="minimum context length")
    p.add_argument("--ratio", type=float, default=0.9, help="train fraction (default 0.9)")
    p.add_argument("--seed", type=int, default=0, help="split seed")
    p.add_argument(
        "--split-mode",
        choices=[m.value for m in cp.SplitMode],
        default=cp.SplitMode.PAIR_LEVEL.value,
        help="pair: shuffle pairs; proof: keep each proof on one side",
    )

    p = sub.add_parser("stats", help="print the dataset summary table")
    p.add_argument("dataset", help="dataset directory")

    for name, help_text in (
        ("train", "train a model on a dataset"),
        ("grid", "grid-search hyperparameters, then keep the best model"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("dataset", help="dataset directory")
        p.add_argument("-o", "--output", required=True, help="checkpoint file to write")
        p.add_argument(
            "--config",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="model config override (repeatable), e.g. --config epochs=10",
        )

    p = sub.add_parser("eval", help="n-correctness of a model on a dataset's test split")
    p.add_argument("model", nargs="?", help="checkpoint file (omit when using --ngram)")
    p.add_argument("dataset", help="dataset directory")
    p.add_argument("--ngram", action="store_true", help="evaluate the n-gram baseline instead")
    p.add_argument("--max-order", type=int, default=3, help="n-gram order (with --ngram)")
    p.add_argument("--n", default="3,7,10", help="comma-separated n values")
    p.add_argument("--k", default=None, help="comma-separated k values (default: all the dataset supports)")
    p.add_argument("--out", default=None, help="also write <out>.txt and <out>.records")

    p = sub.add_parser("recommend", help="print top-n next tactics for a context")
    p.add_argument("model", help="checkpoint file")
    p.add_argument("--tactics", required=True, help='comma-separated context, e.g. "Induct_on,rw,fs"')
    p.add_argument("-n", type=int, default=7, help="number of recommendations")
    p.add_argument("-k", type=int, default=1, choices=(1, 2), help="tactics per recommendation")

    p = sub.add_parser("serve", help="serve recommendations over HTTP")
    p.add_argument("model", help="checkpoint file")
    p.add_argument("--addr", default=None, help=f"bind address (default {DEFAULT_ADDR}, or TACREC_ADDR)")

    return parser


# ---------------------------------------------------------------------------
# dataset helpers


def _truncate_k(pairs: list[cp.ProofStatePair], k: int) -> list[cp.ProofStatePair]:
    """View pairs at a smaller label length by dropping trailing label tokens."""
    return [
        dataclasses.replace(p, label=p.label[:k]) if len(p.label) != k else p
        for p in pairs
    ]


def _test_pairs_for(split: cp.DatasetSplit, dataset_k: int, k: int) -> list[cp.ProofStatePair]:
    if k > dataset_k:
        raise InvalidConfig(
            f"dataset was built with k={dataset_k}; cannot evaluate k={k}"
        )
    return _truncate_k(split.test, k)


def _parse_config_overrides(items: list[str]) -> ModelConfig:
    fields = {f.name: f.type for f in dataclasses.fields(ModelConfig)}
    kwargs = {}
    for item in items:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in fields:
            known = ", ".join(sorted(fields))
            raise InvalidConfig(f"unknown config key {key!r} (known: {known})")
        kwargs[key] = float(value) if key in ("dropout", "lr") else int(value)
    return ModelConfig(**kwargs)


def _training_splits(split: cp.DatasetSplit, seed: int):
    """Carve a validation set out of the train split (pair-level, seeded)."""
    train_k1 = _truncate_k(split.train, 1)
    carve = cp.split_dataset(train_k1, ratio=1.0 - VAL_FRACTION, seed=seed)
    return carve.train, carve.test


# ---------------------------------------------------------------------------
# subcommands


def _cmd_extract(args) -> int:
    records, report = sp.scan_corpus(args.dir)
    sp.write_records(records, args.output)
    print(f"scanned {report.files_scanned} files")
    print(f"extracted {report.proofs_extracted} proofs -> {args.output}")
    if report.skip_reasons:
        by_reason: dict[str, int] = {}
        for skip in report.skip_reasons:
            key = skip.reason.split(":", 1)[0]
            by_reason[key] = by_reason.get(key, 0) + 1
        summary = ", ".join(f"{r}: {c}" for r, c in sorted(by_reason.items()))
        print(f"skipped {report.proofs_skipped} declarations ({summary})")
    return 0


def _cmd_build(args) -> int:
    proofs = sp.read_records(args.proofs)
    pairs = cp.build_pairs(proofs, context_min=args.context_min, k=args.k)
    split = cp.split_dataset(
        pairs, ratio=args.ratio, seed=args.seed, mode=cp.SplitMode(args.split_mode)
    )
    vocab = cp.build_vocab(split.train)
    stats = cp.corpus_stats(proofs, pairs)
    cp.persist_dataset(split, vocab, args.output, context_min=args.context_min, stats=stats)
    print(
        f"wrote {args.output}: {len(split.train)} train / {len(split.test)} test pairs, "
        f"vocab {len(vocab)} ids"
    )
    return 0


def _cmd_stats(args) -> int:
    manifest = cp.read_manifest(args.dataset)
    counts = manifest["counts"]
    proof_states = counts["train_pairs"] + counts["test_pairs"]
    distinct = counts.get("distinct_tactics")
    proofs = counts.get("proofs")
    if distinct is None or proofs is None:
        split, _vocab = cp.load_dataset(args.dataset)
        every = split.train + split.test
        tokens = {t for p in every for t in p.context} | {
            t for p in every for t in p.label
        }
        distinct = len(tokens)
        proofs = len({p.proof_id for p in every})
    stats = cp.CorpusStats(distinct, proofs, proof_states)
    print(cp.render_stats_table(stats, Path(args.dataset).name), end="")
    return 0


def _fit_or_load_model(args, split, vocab, dataset_k):
    if args.ngram and args.model:
        raise InvalidConfig("give either a checkpoint or --ngram, not both")
    if args.ngram:
        train_k1 = _truncate_k(split.train, 1)
        return ngram_fit(train_k1, vocab, max_order=args.max_order)
    if not args.model:
        # reachable only via eval; recommend/serve make `model` positional
        raise InvalidConfig("a checkpoint path (or --ngram) is required")
    ckpt = load_checkpoint(args.model)
    ckpt.check_vocab(vocab)
    return ckpt


def _cmd_train(args, use_grid: bool) -> int:
    split, vocab = cp.load_dataset(args.dataset)
    config = _parse_config_overrides(args.config)
    train_core, val = _training_splits(split, config.seed)
    if use_grid:
        config, ckpt = grid_search(
            default_grid(config), train_core, val, vocab, log_fn=print
        )
        print(f"grid winner: layers={config.layers} embed_dim={config.embed_dim} lr={config.lr}")
    else:
        ckpt = tf_train(config, train_core, val, vocab, log_fn=print)
    save_checkpoint(ckpt, args.output)
    save_vocab_sidecar(vocab, args.output)
    best_rate = ckpt.training_log[ckpt.best_epoch - 1][2]
    print(
        f"saved {args.output} (best epoch {ckpt.best_epoch}, val top-7 {best_rate * 100:.1f}%)"
    )
    return 0


def _cmd_eval(args) -> int:
    split, vocab = cp.load_dataset(args.dataset)
    manifest = cp.read_manifest(args.dataset)
    dataset_k = manifest["k"]
    model = _fit_or_load_model(args, split, vocab, dataset_k)
    ns = [int(x) for x in args.n.split(",") if x.strip()]
    if args.k is None:
        ks = list(range(1, dataset_k + 1))
    else:
        ks = [int(x) for x in args.k.split(",") if x.strip()]
    test_by_k = {k: _test_pairs_for(split, dataset_k, k) for k in ks}
    report = evaluate_suite(
        model, test_by_k, ns=ns, ks=ks, dataset_name=Path(args.dataset).name, vocab=vocab
    )
    table = render_eval_table(report)
    print(table, end="")
    if args.out:
        Path(args.out + ".txt").write_text(table, encoding="utf-8")
        Path(args.out + ".records").write_text(eval_records(report), encoding="utf-8")
        print(f"wrote {args.out}.txt and {args.out}.records")
    return 0


def _cmd_recommend(args) -> int:
    ckpt = load_checkpoint(args.model)
    vocab = load_vocab_sidecar(ckpt, args.model)
    tactics = [t.strip() for t in args.tactics.split(",") if t.strip()]
    rec = predict_topn(ckpt, tactics, args.n, args.k, vocab=vocab)
    for rank, (toks, score) in enumerate(rec.items, start=1):
        print(f"{rank}. {' '.join(toks)} {score:.4f}")
    return 0


def _cmd_serve(args) -> int:
    ckpt = load_checkpoint(args.model)
    vocab = load_vocab_sidecar(ckpt, args.model)
    server = create_server(ckpt, vocab, addr=args.addr)
    host, port = server.server_address[:2]
    print(f"serving on http://{host}:{port}/ (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        if args.command == "extract":
            return _cmd_extract(args)
        if args.command == "build":
            return _cmd_build(args)
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "train":
            return _cmd_train(args, use_grid=False)
        if args.command == "grid":
            return _cmd_train(args, use_grid=True)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "recommend":
            return _cmd_recommend(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except TacrecError as exc:
        sys.stderr.write(f"tacrec: error [{exc.code}]: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"tacrec: error [io-error]: {exc}\n")
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    raise SystemExit(main())
