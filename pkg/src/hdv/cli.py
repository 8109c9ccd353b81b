"""Command-line pipeline: train, query, tag, recommend, eval, export.

Exit codes: 0 on success, 1 on input or configuration errors, 2 when a
query token is not in the vocabulary.  `HDV_THREADS` overrides the
--workers flag wherever training happens.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import evaluation, model_io, query, trainer
from .corpus import build_corpus
from .errors import HdvError, UnknownTokenError
from .model import MODEL_MODES, SOFTMAX_MODES, STREAM_MODES, TrainConfig


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for unknown
    # query tokens here, so route usage problems to exit code 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stream", required=True, help="stream file: one doc-id sequence per line")
    p.add_argument("--content", required=True, help="content file: <doc_id>\\t<body text>")
    p.add_argument("--dim", type=int, default=100)
    p.add_argument("--stream-window", type=int, default=5, metavar="B")
    p.add_argument("--word-window", type=int, default=5, metavar="C")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--lr-min", type=float, default=None)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--softmax", choices=SOFTMAX_MODES, default="hierarchical")
    p.add_argument("--stream-mode", choices=STREAM_MODES, default="skipgram")
    p.add_argument("--mode", choices=MODEL_MODES, default="hdv")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--shuffle", action="store_true", help="shuffle sequence order per epoch")
    p.add_argument("--subsample", type=float, default=0.0,
                   help="word-term subsampling threshold, 0 disables")
    p.add_argument("--min-count", type=int, default=5, help="word frequency cutoff")
    p.add_argument("--min-count-doc", type=int, default=1)
    p.add_argument("--stopwords", default=None, help="file with one stopword per line")
    p.add_argument("--quiet", action="store_true", help="suppress per-epoch progress")


def _config_from_args(args) -> TrainConfig:
    workers = args.workers
    env = os.environ.get("HDV_THREADS")
    if env is not None:
        try:
            workers = int(env)
        except ValueError:
            raise ValueError(f"HDV_THREADS must be an integer, got '{env}'")
    return TrainConfig(
        dim=args.dim,
        stream_window=args.stream_window,
        word_window=args.word_window,
        alpha=args.alpha,
        lr0=args.lr,
        lr_min=args.lr * 1e-4 if args.lr_min is None else args.lr_min,
        epochs=args.epochs,
        softmax_mode=args.softmax,
        stream_mode=args.stream_mode,
        model_mode=args.mode,
        seed=args.seed,
        workers=workers,
        shuffle=args.shuffle,
        subsample=args.subsample,
    )


def _build_corpus_from_args(args):
    return build_corpus(
        args.stream,
        args.content,
        min_count_word=args.min_count,
        min_count_doc=args.min_count_doc,
        stopwords=args.stopwords,
    )


def _train_from_args(args, config: TrainConfig):
    corpus = _build_corpus_from_args(args)
    log = None if args.quiet else lambda line: print(line, file=sys.stderr)
    params, _ = trainer.train(corpus, config, log=log)
    return params


def cmd_train(args) -> int:
    config = _config_from_args(args)
    params = _train_from_args(args, config)
    model_io.save_model(params, args.out)
    return 0


def _print_neighbors(neighbors) -> None:
    for rank, nb in enumerate(neighbors, start=1):
        print(f"{rank}\t{nb.token}\t{nb.cosine:.6f}")


def _load_index(path) -> query.QueryIndex:
    params = model_io.load_model(path)
    index = query.index_from_model(params)
    for modality, token in index.dropped:
        print(f"warning: zero vector excluded: {modality} '{token}'", file=sys.stderr)
    return index


def cmd_query(args) -> int:
    index = _load_index(args.model)
    _print_neighbors(query.nearest(index, args.token, args.from_, args.to, args.k))
    return 0


def cmd_tag(args) -> int:
    index = _load_index(args.model)
    _print_neighbors(query.tag_document(index, args.token, args.k))
    return 0


def cmd_recommend(args) -> int:
    index = _load_index(args.model)
    _print_neighbors(query.recommend(index, args.token, args.k))
    return 0


def cmd_eval(args) -> int:
    if args.folds < 2:
        raise ValueError(f"--folds must be >= 2, got {args.folds}")
    labeled = evaluation.parse_labels(args.labels)
    if args.compare:
        if not (args.stream and args.content):
            raise ValueError("--compare needs --stream and --content to retrain each mode")
        config = _config_from_args(args)
        corpus = _build_corpus_from_args(args)
        results = evaluation.compare_modes(
            corpus, labeled, config, folds=args.folds, c=args.c
        )
        for mode in evaluation.COMPARE_MODES:
            for task in sorted(results[mode]):
                print(f"{task}\t{mode}\t{results[mode][task]:.4f}")
        return 0
    if not args.model:
        raise ValueError("provide --model, or --compare with --stream/--content")
    params = model_io.load_model(args.model)
    accs = evaluation.cross_validate(
        params.doc_vocab.tokens,
        params.doc_in,
        labeled,
        folds=args.folds,
        c=args.c,
        seed=params.config.seed,
    )
    for task in sorted(accs):
        print(f"{task}\t{params.config.model_mode}\t{accs[task]:.4f}")
    return 0


def cmd_export(args) -> int:
    params = model_io.load_model(args.model)
    model_io.export_embeddings(params, args.modality, args.out, fmt=args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hdv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[], help="train a model from stream+content files")
    _add_train_flags(p)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    for name, func, help_text in (
        ("query", cmd_query, "top-K cosine neighbors of a token"),
        ("tag", cmd_tag, "nearest words to a document"),
        ("recommend", cmd_recommend, "nearest documents to a document"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True)
        p.add_argument("token")
        p.add_argument("-k", type=int, default=10)
        if name == "query":
            p.add_argument("--from", dest="from_", choices=query.MODALITIES, required=True)
            p.add_argument("--to", choices=query.MODALITIES, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("eval", help="cross-validated accuracy on labeled documents")
    p.add_argument("--labels", required=True, help="labels file: <doc_id>\\t<task>\\t<0|1>")
    p.add_argument("--model", default=None)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--c", type=float, default=1.0, help="inverse regularization strength")
    p.add_argument("--compare", action="store_true", help="retrain and compare modes")
    _add_train_flags_optional(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export", help="write embeddings to text or binary")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--modality", choices=model_io.MODALITY_CHOICES, default="both")
    p.add_argument("--format", choices=model_io.FORMAT_CHOICES, default="text")
    p.set_defaults(func=cmd_export)

    return parser


def _add_train_flags_optional(p: argparse.ArgumentParser) -> None:
    # same surface as the train command, minus the hard requirements
    _add_train_flags(p)
    for action in p._actions:
        if action.dest in ("stream", "content"):
            action.required = False
            action.default = None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnknownTokenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (HdvError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
