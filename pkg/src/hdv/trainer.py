"""SGD training loop over the three objective terms.

An epoch walks every sequence in corpus order and, per document
occurrence, emits stream-prediction examples over window b, then the
document-from-content example, then one word-prediction example per
body token under window c.  Which terms are active depends on
``model_mode``:

  hdv            stream + word + content
  word2vec_sg    stream only (documents treated as plain tokens)
  word2vec_cbow  word only, without the document in the context
  paragraph2vec  word only, with the document in the context

The learning rate decays linearly from lr0 to lr_min over the full
schedule (examples per epoch times epochs).  With workers > 1 the
sequences are partitioned statically across threads that update shared
tables without locking; results are bit-deterministic only at workers=1.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .corpus import Corpus
from .model import ModelParams, TrainConfig, TrainingExample, example_loss, init_params, sgd_update

_EMPTY = np.empty(0, dtype=np.int32)

TERM_KINDS = ("stream", "word", "content")


def active_terms(config: TrainConfig) -> tuple[bool, bool, bool]:
    """(stream, word, content) activation flags for the configured mode."""
    mode = config.model_mode
    return (
        mode in ("hdv", "word2vec_sg"),
        mode in ("hdv", "word2vec_cbow", "paragraph2vec"),
        mode == "hdv",
    )


def _stream_examples(seq: np.ndarray, m: int, config: TrainConfig):
    b = config.stream_window
    L = len(seq)
    if config.stream_mode == "skipgram":
        src = seq[m : m + 1]
        for i in range(max(0, m - b), min(L, m + b + 1)):
            if i != m:
                yield TrainingExample("stream", int(seq[i]), src, _EMPTY)
    elif config.stream_mode == "forward":
        if m >= 1:
            yield TrainingExample("stream", int(seq[m]), seq[max(0, m - b) : m], _EMPTY)
    else:
        if m <= L - 2:
            yield TrainingExample("stream", int(seq[m]), seq[m + 1 : m + 1 + b], _EMPTY)


def _word_examples(doc: int, body: np.ndarray, config: TrainConfig):
    c = config.word_window
    with_doc = config.model_mode != "word2vec_cbow"
    doc_ctx = np.array([doc], dtype=np.int32) if with_doc else _EMPTY
    for t in range(len(body)):
        wctx = np.concatenate((body[max(0, t - c) : t], body[t + 1 : t + c + 1]))
        if not with_doc and len(wctx) == 0:
            continue
        yield TrainingExample("word", int(body[t]), doc_ctx, wctx)


def subsample_keep_probs(corpus: Corpus, threshold: float) -> np.ndarray:
    """Per-word keep probability min(1, sqrt(t/f) + t/f), f the word's
    share of all token occurrences."""
    freqs = np.asarray(corpus.word_vocab.freqs, dtype=np.float64)
    f = freqs / freqs.sum()
    ratio = threshold / f
    return np.minimum(1.0, np.sqrt(ratio) + ratio)


def epoch_examples(
    corpus: Corpus,
    config: TrainConfig,
    order: Iterable[int] | None = None,
    word_keep: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
):
    """Every training example of one epoch, in deterministic order.

    ``order`` selects and orders the sequences (default: corpus order).
    When ``word_keep`` and ``rng`` are given, the word term sees a body
    thinned by per-word keep probabilities; the content term always sees
    the full body.  Word and content examples repeat with each occurrence
    of a document in the stream.
    """
    stream_on, word_on, content_on = active_terms(config)
    if order is None:
        order = range(len(corpus.sequences))
    thin = word_on and word_keep is not None and rng is not None
    for si in order:
        seq = corpus.sequences[si]
        for m in range(len(seq)):
            if stream_on:
                yield from _stream_examples(seq, m, config)
            d = int(seq[m])
            body = corpus.bodies[d]
            if content_on and len(body):
                yield TrainingExample("content", d, _EMPTY, body)
            if word_on:
                if thin and len(body):
                    body = body[rng.random(len(body)) < word_keep[body]]
                yield from _word_examples(d, body, config)


def scheduled_example_count(corpus: Corpus, config: TrainConfig) -> int:
    """Exact number of examples one epoch yields, in closed form.

    Subsampling is ignored here: the schedule is sized for the full
    stream, so thinned epochs simply decay the learning rate a bit more
    slowly per example.
    """
    stream_on, word_on, content_on = active_terms(config)
    b = config.stream_window
    cbow = config.model_mode == "word2vec_cbow"
    n = 0
    for seq in corpus.sequences:
        L = len(seq)
        if stream_on:
            if config.stream_mode == "skipgram":
                n += sum(min(b, L - 1 - m) + min(b, m) for m in range(L))
            else:
                n += max(0, L - 1)
        for d in seq:
            t = len(corpus.bodies[int(d)])
            if word_on:
                if cbow:
                    n += t if t >= 2 else 0
                else:
                    n += t
            if content_on and t:
                n += 1
    return n


def learning_rate(config: TrainConfig, step: int, total: int) -> float:
    """Linear decay from lr0 after ``step`` of ``total`` examples, floored."""
    if total <= 0:
        return config.lr0
    return max(config.lr_min, config.lr0 * (1.0 - step / total))


@dataclass
class TrainReport:
    """What an entire run did: per-epoch mean loss by term, totals, time."""

    epoch_losses: list[dict[str, float]] = field(default_factory=list)
    examples: int = 0
    wall_time: float = 0.0
    final_lr: float = 0.0


def _new_acc() -> dict:
    return {k: [0.0, 0] for k in TERM_KINDS}


def _run_chunk(
    params: ModelParams,
    corpus: Corpus,
    config: TrainConfig,
    order,
    step_cell: list,
    total: int,
    acc: dict,
    word_keep,
    rng,
) -> None:
    lr0, lr_min = config.lr0, config.lr_min
    for ex in epoch_examples(corpus, config, order, word_keep, rng):
        step_cell[0] += 1
        lr = max(lr_min, lr0 * (1.0 - step_cell[0] / total))
        loss = sgd_update(params, ex, lr)
        slot = acc[ex.kind]
        slot[0] += loss
        slot[1] += 1


def train(
    corpus: Corpus, config: TrainConfig, log: Callable[[str], None] | None = None
) -> tuple[ModelParams, TrainReport]:
    """Initialize parameters and run the configured number of epochs.

    ``log`` receives one line per epoch with the mean per-example loss
    of each term and the current learning rate.  Raises on a corpus with
    no documents or no words.
    """
    params = init_params(corpus, config)
    report = TrainReport(final_lr=config.lr0)
    per_epoch = scheduled_example_count(corpus, config)
    total = per_epoch * config.epochs
    if total == 0:
        return params, report
    started = time.perf_counter()
    step_cell = [0]
    shuffle_rng = np.random.default_rng(config.seed) if config.shuffle else None
    word_keep = (
        subsample_keep_probs(corpus, config.subsample) if config.subsample > 0 else None
    )
    for epoch in range(1, config.epochs + 1):
        if shuffle_rng is not None:
            order = shuffle_rng.permutation(len(corpus.sequences))
        else:
            order = np.arange(len(corpus.sequences))
        if config.workers == 1:
            accs = [_new_acc()]
            rng = np.random.default_rng((config.seed, epoch)) if word_keep is not None else None
            _run_chunk(params, corpus, config, order, step_cell, total, accs[0], word_keep, rng)
        else:
            chunks = [order[i :: config.workers] for i in range(config.workers)]
            accs = [_new_acc() for _ in chunks]
            threads = []
            for ci, (ch, acc) in enumerate(zip(chunks, accs)):
                rng = (
                    np.random.default_rng((config.seed, epoch, ci))
                    if word_keep is not None
                    else None
                )
                threads.append(
                    threading.Thread(
                        target=_run_chunk,
                        args=(params, corpus, config, ch, step_cell, total, acc, word_keep, rng),
                    )
                )
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        means = {}
        for kind in TERM_KINDS:
            s = sum(a[kind][0] for a in accs)
            n = sum(a[kind][1] for a in accs)
            means[kind] = s / n if n else 0.0
        report.epoch_losses.append(means)
        report.examples += sum(a[kind][1] for a in accs for kind in TERM_KINDS)
        report.final_lr = learning_rate(config, step_cell[0], total)
        if log is not None:
            log(
                f"epoch {epoch}/{config.epochs}"
                f"  loss_stream {means['stream']:.4f}"
                f"  loss_word {means['word']:.4f}"
                f"  loss_content {means['content']:.4f}"
                f"  lr {report.final_lr:.6f}"
            )
    report.wall_time = time.perf_counter() - started
    return params, report


def corpus_objective(params: ModelParams, corpus: Corpus) -> dict[str, float]:
    """Total weighted negative log-likelihood per term at the current
    parameters; ``total`` is the quantity SGD descends."""
    sums = dict.fromkeys(TERM_KINDS, 0.0)
    for ex in epoch_examples(corpus, params.config):
        sums[ex.kind] += example_loss(params, ex)
    sums["total"] = sums["stream"] + sums["word"] + sums["content"]
    return sums
