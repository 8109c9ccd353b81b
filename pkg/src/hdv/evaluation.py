"""Evaluation protocol: planted-topic corpora and linear classification.

The synthetic generator plants two kinds of recoverable structure: the
word distribution of a document's body depends on its topic (content
signal), and consecutive documents in a sequence share a topic with
probability pi plus the uniform-resample mass (stream signal).  Topic
membership doubles as binary one-vs-rest classification labels, giving a
ground truth against which trained document vectors are scored with a
hinge-loss linear classifier under stratified k-fold cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .corpus import Corpus, corpus_from_sequences
from .errors import CorpusFormatError
from .model import TrainConfig
from .trainer import train

COMPARE_MODES = ("hdv", "word2vec_sg", "paragraph2vec")


@dataclass(frozen=True)
class LabeledSet:
    """Binary labels per task, keyed by document token."""

    tasks: tuple[str, ...]
    labels: dict[str, dict[str, int]]

    def doc_tokens(self, task: str) -> list[str]:
        return sorted(self.labels[task])


def parse_labels(path) -> LabeledSet:
    """Read `<doc_id>\\t<task>\\t<0|1>` lines."""
    labels: dict[str, dict[str, int]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusFormatError(
                    f"{path}:{lineno}: expected '<doc_id>\\t<task>\\t<0|1>'"
                )
            doc, task, lab = parts
            if lab not in ("0", "1"):
                raise CorpusFormatError(f"{path}:{lineno}: label must be 0 or 1, got '{lab}'")
            labels.setdefault(task, {})[doc] = int(lab)
    if not labels:
        raise CorpusFormatError(f"{path}: no labels found")
    return LabeledSet(tasks=tuple(sorted(labels)), labels=labels)


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the planted-topic corpus.

    coherence is the probability a sequence stays in its current topic at
    each step; the remaining mass resamples the topic uniformly, so the
    expected same-topic fraction of adjacent pairs is
    coherence + (1 - coherence) / topics.  topic_word_fraction is the
    probability a body token comes from the topic vocabulary rather than
    the shared one: 0 removes all content signal.
    """

    topics: int = 2
    docs_per_topic: int = 50
    vocab_per_topic: int = 30
    shared_vocab: int = 20
    body_length: int = 30
    sequence_count: int = 150
    sequence_length: int = 8
    coherence: float = 0.9
    topic_word_fraction: float = 0.8
    seed: int = 7

    def __post_init__(self) -> None:
        for name in (
            "topics",
            "docs_per_topic",
            "vocab_per_topic",
            "body_length",
            "sequence_count",
            "sequence_length",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.shared_vocab < 0:
            raise ValueError("shared_vocab must be >= 0")
        if not 0.0 <= self.coherence <= 1.0:
            raise ValueError("coherence must lie in [0, 1]")
        if not 0.0 <= self.topic_word_fraction <= 1.0:
            raise ValueError("topic_word_fraction must lie in [0, 1]")
        if self.topic_word_fraction > 0 and self.vocab_per_topic < 1:
            raise ValueError("vocab_per_topic must be >= 1 when topic words are drawn")
        if self.topic_word_fraction < 1 and self.shared_vocab < 1:
            raise ValueError("shared_vocab must be >= 1 when shared words are drawn")


def topic_vocabulary(spec: SyntheticSpec, topic: int) -> set[str]:
    return {f"w{topic}_{j}" for j in range(spec.vocab_per_topic)}


def generate_synthetic(spec: SyntheticSpec) -> tuple[Corpus, LabeledSet]:
    """Build a corpus with planted topic structure plus matching labels.

    Every document is guaranteed to appear in at least one sequence
    (stragglers are appended in topic-grouped sequences), so all labeled
    ids survive corpus construction.  Deterministic per seed.
    """
    rng = np.random.default_rng(spec.seed)
    docs = [
        (f"d{t}_{i}", t) for t in range(spec.topics) for i in range(spec.docs_per_topic)
    ]
    doc_topic = dict(docs)
    by_topic = [
        [tok for tok, t in docs if t == topic] for topic in range(spec.topics)
    ]

    bodies: dict[str, list[str]] = {}
    for tok, t in docs:
        body = []
        for _ in range(spec.body_length):
            if rng.random() < spec.topic_word_fraction:
                body.append(f"w{t}_{rng.integers(spec.vocab_per_topic)}")
            else:
                body.append(f"s_{rng.integers(spec.shared_vocab)}")
        bodies[tok] = body

    sequences: list[list[str]] = []
    seen: set[str] = set()
    for _ in range(spec.sequence_count):
        topic = int(rng.integers(spec.topics))
        seq = []
        for _ in range(spec.sequence_length):
            if rng.random() >= spec.coherence:
                topic = int(rng.integers(spec.topics))
            doc = by_topic[topic][int(rng.integers(len(by_topic[topic])))]
            seq.append(doc)
            seen.add(doc)
        sequences.append(seq)
    for topic in range(spec.topics):
        missing = [d for d in by_topic[topic] if d not in seen]
        for i in range(0, len(missing), spec.sequence_length):
            sequences.append(missing[i : i + spec.sequence_length])

    corpus = corpus_from_sequences(sequences, bodies, min_count_word=1, min_count_doc=1)
    labels = {
        f"topic{t}": {tok: int(doc_topic[tok] == t) for tok, _ in docs}
        for t in range(spec.topics)
    }
    labeled = LabeledSet(tasks=tuple(sorted(labels)), labels=labels)
    return corpus, labeled


def content_free_spec(spec: SyntheticSpec) -> SyntheticSpec:
    """Same corpus shape with bodies drawn entirely from the shared vocab."""
    return replace(spec, topic_word_fraction=0.0)


def stream_free_spec(spec: SyntheticSpec) -> SyntheticSpec:
    """Same corpus shape with topic resampled uniformly at every step."""
    return replace(spec, coherence=0.0)


def _train_hinge(X: np.ndarray, y: np.ndarray, c: float, epochs: int, rng) -> tuple:
    """Pegasos-style hinge + L2 SGD; y in {-1, +1}; returns (w, b)."""
    n, d = X.shape
    lam = 1.0 / (c * n)
    w = np.zeros(d)
    b = 0.0
    radius = 1.0 / np.sqrt(lam)
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[i] * (X[i] @ w + b)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * y[i] * X[i]
                # unregularized bias, damped so it cannot dominate early steps
                b += 0.1 * y[i] / t
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
    return w, b


def stratified_folds(y: np.ndarray, folds: int, rng) -> list[np.ndarray]:
    """Deal each class round-robin into ``folds`` test groups."""
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    assign = np.empty(len(y), dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if len(idx) < folds:
            raise ValueError(
                f"class {cls} has {len(idx)} examples but {folds} folds requested; "
                "stratification needs at least one example per class per fold"
            )
        idx = rng.permutation(idx)
        assign[idx] = np.arange(len(idx)) % folds
    return [np.flatnonzero(assign == f) for f in range(folds)]


def cross_validate(
    doc_tokens: Sequence[str],
    doc_vectors: np.ndarray,
    labeled: LabeledSet,
    folds: int = 5,
    c: float = 1.0,
    epochs: int = 30,
    seed: int = 0,
) -> dict[str, float]:
    """Mean held-out accuracy per task over stratified folds.

    Features are standardized with statistics of each training fold.
    Raises if a labeled document is missing from ``doc_tokens``.
    """
    pos = {t: i for i, t in enumerate(doc_tokens)}
    results: dict[str, float] = {}
    for task in labeled.tasks:
        pairs = sorted(labeled.labels[task].items())
        missing = [d for d, _ in pairs if d not in pos]
        if missing:
            raise ValueError(
                f"task '{task}': {len(missing)} labeled documents not in the model "
                f"(first: '{missing[0]}')"
            )
        X = np.asarray(doc_vectors)[[pos[d] for d, _ in pairs]]
        y = np.array([1 if lab == 1 else -1 for _, lab in pairs])
        rng = np.random.default_rng(seed)
        accs = []
        for test_idx in stratified_folds(y, folds, rng):
            mask = np.ones(len(y), dtype=bool)
            mask[test_idx] = False
            if len(np.unique(y[mask])) < 2:
                raise ValueError(
                    f"task '{task}': a class is absent from a training fold; "
                    "use stratified folds with enough examples per class"
                )
            mu = X[mask].mean(axis=0)
            sd = X[mask].std(axis=0)
            sd[sd == 0.0] = 1.0
            Xtr = (X[mask] - mu) / sd
            Xte = (X[test_idx] - mu) / sd
            w, b = _train_hinge(Xtr, y[mask], c, epochs, rng)
            pred = np.where(Xte @ w + b >= 0.0, 1, -1)
            accs.append(float(np.mean(pred == y[test_idx])))
        results[task] = float(np.mean(accs))
    return results


def compare_modes(
    corpus: Corpus,
    labeled: LabeledSet,
    config: TrainConfig,
    folds: int = 5,
    c: float = 1.0,
    modes: tuple[str, ...] = COMPARE_MODES,
) -> dict[str, dict[str, float]]:
    """Train each mode with identical hyperparameters and cross-validate."""
    out: dict[str, dict[str, float]] = {}
    for mode in modes:
        params, _ = train(corpus, replace(config, model_mode=mode))
        out[mode] = cross_validate(
            params.doc_vocab.tokens,
            params.doc_in,
            labeled,
            folds=folds,
            c=c,
            seed=config.seed,
        )
    return out
