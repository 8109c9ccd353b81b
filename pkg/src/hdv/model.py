"""Model parameters, probabilities, and gradients.

One shared mechanism drives all three objective terms: average the input
vectors of a context (a document vector, surrounding word vectors, or
both), then score a target against an output table, either with an exact
softmax over the full target vocabulary or with a binary Huffman-tree
decomposition where each internal node contributes one sigmoid factor.

Gradients here are the reference implementation: every examined quantity
is returned sparsely so tests can check it against finite differences.
The fused in-place step used by the trainer lives in ``sgd_update`` and
must stay numerically identical to applying ``loss_and_grads`` output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .corpus import Corpus, Vocabulary
from .huffman import HuffmanTree, build_tree

SOFTMAX_MODES = ("exact", "hierarchical")
STREAM_MODES = ("skipgram", "forward", "backward")
MODEL_MODES = ("hdv", "word2vec_cbow", "word2vec_sg", "paragraph2vec")

# Piecewise-constant sigmoid over [-6, 6]; values outside saturate.
SIGMOID_RANGE = 6.0
SIGMOID_TABLE_SIZE = 1000
_TABLE_X = (np.arange(SIGMOID_TABLE_SIZE) + 0.5) / SIGMOID_TABLE_SIZE
_TABLE_X = (_TABLE_X * 2.0 - 1.0) * SIGMOID_RANGE
_SIGMOID_TABLE = 1.0 / (1.0 + np.exp(-_TABLE_X))

_exact_sigmoid = False


def set_exact_sigmoid(flag: bool) -> None:
    """Switch every sigmoid evaluation to the closed form (for tests)."""
    global _exact_sigmoid
    _exact_sigmoid = bool(flag)


def exact_sigmoid_enabled() -> bool:
    return _exact_sigmoid


def sigmoid(x):
    if _exact_sigmoid:
        x = np.asarray(x, dtype=np.float64)
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        return out if out.ndim else float(out)
    x = np.asarray(x, dtype=np.float64)
    idx = ((x + SIGMOID_RANGE) * (SIGMOID_TABLE_SIZE / (2.0 * SIGMOID_RANGE))).astype(np.int64)
    idx = np.clip(idx, 0, SIGMOID_TABLE_SIZE - 1)
    out = _SIGMOID_TABLE[idx]
    return out if out.ndim else float(out)


@dataclass
class TrainConfig:
    """Hyperparameters for a training run.

    lr decays linearly from lr0 to lr_min over all scheduled examples.
    alpha scales the word and content terms relative to the stream term.
    shuffle permutes sequence order each epoch (off by default: stream
    data arrives in temporal order).  subsample > 0 randomly thins
    frequent words out of the word term, word2vec style.
    """

    dim: int = 100
    stream_window: int = 5
    word_window: int = 5
    alpha: float = 1.0
    lr0: float = 0.025
    lr_min: float = 0.025 * 1e-4
    epochs: int = 5
    softmax_mode: str = "hierarchical"
    stream_mode: str = "skipgram"
    model_mode: str = "hdv"
    seed: int = 1
    workers: int = 1
    shuffle: bool = False
    subsample: float = 0.0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.stream_window < 1:
            raise ValueError(f"stream_window must be >= 1, got {self.stream_window}")
        if self.word_window < 1:
            raise ValueError(f"word_window must be >= 1, got {self.word_window}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not 0.0 < self.lr_min < self.lr0:
            raise ValueError(
                f"need lr0 > lr_min > 0, got lr0={self.lr0}, lr_min={self.lr_min}"
            )
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.softmax_mode not in SOFTMAX_MODES:
            raise ValueError(f"softmax_mode must be one of {SOFTMAX_MODES}")
        if self.stream_mode not in STREAM_MODES:
            raise ValueError(f"stream_mode must be one of {STREAM_MODES}")
        if self.model_mode not in MODEL_MODES:
            raise ValueError(f"model_mode must be one of {MODEL_MODES}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if not 0.0 <= self.subsample < 1.0:
            raise ValueError(f"subsample must lie in [0, 1), got {self.subsample}")


class TrainingExample(NamedTuple):
    """One prediction task: guess ``target`` from averaged context vectors.

    kind "stream" and "content" predict a document; kind "word" predicts
    a word.  Context arrays may repeat an id; each occurrence contributes
    to the average and receives its share of the input gradient.
    """

    kind: str
    target: int
    context_docs: np.ndarray
    context_words: np.ndarray


def target_side(kind: str) -> str:
    return "word" if kind == "word" else "doc"


@dataclass
class ModelParams:
    """Embedding tables plus the output structures they are trained against.

    Input tables always have one row per vocabulary entry.  Output tables
    have one row per entry under exact softmax and one row per Huffman
    internal node (size V-1) under hierarchical softmax.
    """

    config: TrainConfig
    word_vocab: Vocabulary
    doc_vocab: Vocabulary
    doc_in: np.ndarray
    word_in: np.ndarray
    doc_out: np.ndarray
    word_out: np.ndarray
    doc_tree: HuffmanTree | None = None
    word_tree: HuffmanTree | None = None

    def in_table(self, side: str) -> np.ndarray:
        return self.doc_in if side == "doc" else self.word_in

    def out_table(self, side: str) -> np.ndarray:
        return self.doc_out if side == "doc" else self.word_out

    def tree(self, side: str) -> HuffmanTree | None:
        return self.doc_tree if side == "doc" else self.word_tree


def init_params(corpus: Corpus, config: TrainConfig) -> ModelParams:
    """Allocate tables: inputs uniform in [-0.5/dim, 0.5/dim], outputs zero."""
    rng = np.random.default_rng(config.seed)
    d = config.dim
    m, w = len(corpus.doc_vocab), len(corpus.word_vocab)
    if m < 1 or w < 1:
        raise ValueError(f"corpus must have at least one document and one word, got M={m}, W={w}")
    bound = 0.5 / d
    doc_in = rng.uniform(-bound, bound, size=(m, d))
    word_in = rng.uniform(-bound, bound, size=(w, d))
    doc_tree = word_tree = None
    if config.softmax_mode == "hierarchical":
        doc_tree = build_tree([int(f) for f in corpus.doc_vocab.freqs])
        doc_out = np.zeros((doc_tree.internal_count, d))
        word_tree = build_tree([int(f) for f in corpus.word_vocab.freqs])
        word_out = np.zeros((word_tree.internal_count, d))
    else:
        doc_out = np.zeros((m, d))
        word_out = np.zeros((w, d))
    return ModelParams(
        config=config,
        word_vocab=corpus.word_vocab,
        doc_vocab=corpus.doc_vocab,
        doc_in=doc_in,
        word_in=word_in,
        doc_out=doc_out,
        word_out=word_out,
        doc_tree=doc_tree,
        word_tree=word_tree,
    )


def context_vector(params: ModelParams, context_docs, context_words) -> np.ndarray:
    """Mean of the referenced input vectors; duplicates count once per use."""
    n = len(context_docs) + len(context_words)
    if n == 0:
        raise ValueError("context must reference at least one vector")
    v = np.zeros(params.config.dim)
    if len(context_docs):
        v += params.doc_in[np.asarray(context_docs, dtype=np.int64)].sum(axis=0)
    if len(context_words):
        v += params.word_in[np.asarray(context_words, dtype=np.int64)].sum(axis=0)
    return v / n


def target_distribution(params: ModelParams, example: TrainingExample) -> np.ndarray:
    """P(target = j | context) for every j in the target vocabulary."""
    side = target_side(example.kind)
    v = context_vector(params, example.context_docs, example.context_words)
    if params.config.softmax_mode == "exact":
        scores = params.out_table(side) @ v
        scores -= scores.max()
        e = np.exp(scores)
        return e / e.sum()
    tree = params.tree(side)
    out = params.out_table(side)
    probs = np.empty(tree.leaf_count)
    for j in range(tree.leaf_count):
        x = out[tree.paths[j]] @ v
        s = sigmoid(x)
        bits = tree.codes[j]
        probs[j] = float(np.prod(np.where(bits == 1, s, 1.0 - s)))
    return probs


def target_probability(params: ModelParams, example: TrainingExample) -> float:
    """P(target | context) under the configured softmax."""
    side = target_side(example.kind)
    v = context_vector(params, example.context_docs, example.context_words)
    if params.config.softmax_mode == "exact":
        scores = params.out_table(side) @ v
        scores -= scores.max()
        e = np.exp(scores)
        return float(e[example.target] / e.sum())
    tree = params.tree(side)
    x = params.out_table(side)[tree.paths[example.target]] @ v
    s = sigmoid(x)
    bits = tree.codes[example.target]
    return float(np.prod(np.where(bits == 1, s, 1.0 - s)))


def term_weight(config: TrainConfig, kind: str) -> float:
    """Objective weight of an example: 1 for stream, alpha otherwise."""
    return 1.0 if kind == "stream" else config.alpha


def example_loss(params: ModelParams, example: TrainingExample) -> float:
    """Weighted negative log-likelihood of the example's target."""
    weight = term_weight(params.config, example.kind)
    if weight == 0.0:
        return 0.0
    side = target_side(example.kind)
    v = context_vector(params, example.context_docs, example.context_words)
    out = params.out_table(side)
    if params.config.softmax_mode == "exact":
        scores = out @ v
        m = scores.max()
        return weight * float(m + np.log(np.exp(scores - m).sum()) - scores[example.target])
    tree = params.tree(side)
    nodes = tree.paths[example.target]
    if len(nodes) == 0:
        return 0.0
    s = sigmoid(out[nodes] @ v)
    bits = tree.codes[example.target]
    return -weight * float(np.sum(np.log(np.where(bits == 1, s, 1.0 - s))))


def _input_grads(example: TrainingExample, grad_v: np.ndarray) -> dict:
    """Distribute the context-mean gradient over its contributors."""
    n = len(example.context_docs) + len(example.context_words)
    share = grad_v / n
    doc_g: dict[int, np.ndarray] = {}
    for d in example.context_docs:
        d = int(d)
        if d in doc_g:
            doc_g[d] = doc_g[d] + share
        else:
            doc_g[d] = share.copy()
    word_g: dict[int, np.ndarray] = {}
    for w in example.context_words:
        w = int(w)
        if w in word_g:
            word_g[w] = word_g[w] + share
        else:
            word_g[w] = share.copy()
    return {"doc_in": doc_g, "word_in": word_g}


def loss_and_grads(params: ModelParams, example: TrainingExample):
    """Weighted negative log-likelihood and its sparse gradients.

    Returns (loss, grads) with grads keyed by table name then row id.
    Word and content examples carry the alpha weight on both the loss
    and every gradient, so alpha=0 contributes nothing.  For averaged
    contexts each contributor receives gradient/denominator, duplicates
    accumulating once per occurrence.
    """
    weight = term_weight(params.config, example.kind)
    side = target_side(example.kind)
    v = context_vector(params, example.context_docs, example.context_words)
    out = params.out_table(side)
    out_key = "doc_out" if side == "doc" else "word_out"

    if params.config.softmax_mode == "exact":
        scores = out @ v
        scores -= scores.max()
        e = np.exp(scores)
        p = e / e.sum()
        loss = -weight * float(np.log(p[example.target]))
        resid = p.copy()
        resid[example.target] -= 1.0
        resid *= weight
        grad_v = out.T @ resid
        out_g = {j: resid[j] * v for j in range(out.shape[0])}
    else:
        tree = params.tree(side)
        nodes = tree.paths[example.target]
        bits = tree.codes[example.target]
        if len(nodes) == 0:
            loss = 0.0
            grad_v = np.zeros_like(v)
            out_g = {}
        else:
            x = out[nodes] @ v
            s = sigmoid(x)
            loss = -weight * float(np.sum(np.log(np.where(bits == 1, s, 1.0 - s))))
            g = weight * (s - bits)
            grad_v = out[nodes].T @ g
            out_g = {int(q): g[l] * v for l, q in enumerate(nodes)}

    grads = _input_grads(example, grad_v)
    grads[out_key] = out_g
    return loss, grads


# When set, every SGD step asserts the touched rows stayed finite.
CHECK_FINITE = False


def sgd_update(params: ModelParams, example: TrainingExample, lr: float) -> float:
    """Apply one in-place gradient step; returns the pre-step loss.

    Equivalent to ``loss_and_grads`` followed by row-wise subtraction of
    lr times each gradient, with all gradients evaluated at the pre-step
    parameters.
    """
    weight = term_weight(params.config, example.kind)
    side = target_side(example.kind)
    docs = np.asarray(example.context_docs, dtype=np.int64)
    words = np.asarray(example.context_words, dtype=np.int64)
    n = len(docs) + len(words)
    if n == 0:
        raise ValueError("context must reference at least one vector")
    v = np.zeros(params.config.dim)
    if len(docs):
        v += params.doc_in[docs].sum(axis=0)
    if len(words):
        v += params.word_in[words].sum(axis=0)
    v /= n
    out = params.out_table(side)
    step = lr * weight

    if params.config.softmax_mode == "exact":
        scores = out @ v
        scores -= scores.max()
        e = np.exp(scores)
        p = e / e.sum()
        loss = -weight * float(np.log(p[example.target]))
        resid = p
        resid[example.target] -= 1.0
        grad_v = out.T @ resid
        out -= np.outer(step * resid, v)
    else:
        tree = params.tree(side)
        nodes = tree.paths[example.target]
        bits = tree.codes[example.target]
        if len(nodes) == 0:
            return 0.0
        x = out[nodes] @ v
        s = sigmoid(x)
        loss = -weight * float(np.sum(np.log(np.where(bits == 1, s, 1.0 - s))))
        g = s - bits
        grad_v = out[nodes].T @ g
        out[nodes] -= np.outer(step * g, v)

    share = (step / n) * grad_v
    if len(docs):
        np.subtract.at(params.doc_in, docs, share)
    if len(words):
        np.subtract.at(params.word_in, words, share)
    if CHECK_FINITE:
        assert np.isfinite(params.doc_in[docs]).all()
        assert np.isfinite(params.word_in[words]).all()
        assert np.isfinite(out).all()
    return loss
