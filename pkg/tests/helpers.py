"""Independent oracles the tests check the implementation against.

Everything here is written from first principles on purpose: plain
softmax/sigmoid math, exhaustive tree search, brute-force scans.  None
of it may call into the corresponding hdv fast paths, otherwise the
tests would only prove the code agrees with itself.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from hdv.corpus import Vocabulary
from hdv.model import ModelParams, TrainConfig, TrainingExample, example_loss, target_side


# ---------------------------------------------------------------- gradients

def finite_difference_grads(params: ModelParams, example: TrainingExample, step=1e-5):
    """Central finite differences of the example loss w.r.t. every row
    that can receive gradient: context rows and the full output table."""
    side = target_side(example.kind)
    out_key = "doc_out" if side == "doc" else "word_out"
    rows = {
        "doc_in": sorted({int(d) for d in example.context_docs}),
        "word_in": sorted({int(w) for w in example.context_words}),
        out_key: list(range(params.out_table(side).shape[0])),
    }
    grads: dict[str, dict[int, np.ndarray]] = {}
    for table_name, row_ids in rows.items():
        table = getattr(params, table_name)
        grads[table_name] = {}
        for r in row_ids:
            g = np.zeros(table.shape[1])
            for j in range(table.shape[1]):
                orig = table[r, j]
                table[r, j] = orig + step
                up = example_loss(params, example)
                table[r, j] = orig - step
                down = example_loss(params, example)
                table[r, j] = orig
                g[j] = (up - down) / (2.0 * step)
            grads[table_name][r] = g
    return grads


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    denom = max(np.linalg.norm(a), np.linalg.norm(b), 1e-8)
    return float(np.linalg.norm(a - b) / denom)


# ------------------------------------------------------- huffman optimality

@lru_cache(maxsize=None)
def _depth_profiles(n: int) -> frozenset[tuple[int, ...]]:
    """Sorted leaf-depth profiles of every full binary tree with n leaves."""
    if n == 1:
        return frozenset({(0,)})
    profiles = set()
    for left in range(1, n):
        for lp in _depth_profiles(left):
            for rp in _depth_profiles(n - left):
                prof = tuple(sorted([d + 1 for d in lp] + [d + 1 for d in rp]))
                profiles.add(prof)
    return frozenset(profiles)


@lru_cache(maxsize=None)
def _optimal_cost_sorted(freqs_desc: tuple[int, ...]) -> int:
    """Exhaustive minimum of sum(freq * depth) over all full binary trees.

    For any fixed depth profile the best assignment pairs large
    frequencies with small depths (rearrangement), so searching sorted
    profiles against descending frequencies covers all assignments.
    """
    n = len(freqs_desc)
    best = None
    for profile in _depth_profiles(n):
        cost = sum(f * d for f, d in zip(freqs_desc, profile))
        if best is None or cost < best:
            best = cost
    return best


def optimal_weighted_cost(freqs) -> int:
    """Minimum total weighted code length for the frequency vector."""
    return _optimal_cost_sorted(tuple(sorted(freqs, reverse=True)))


def is_prefix_free(codes) -> bool:
    strings = ["".join(str(b) for b in c) for c in codes]
    for a, b in combinations(strings, 2):
        if a.startswith(b) or b.startswith(a):
            return False
    return True


# ------------------------------------------------------------ retrieval scan

def brute_force_neighbors(tokens, unit_vectors, query_vec, exclude_token, k):
    """Reference top-k: python-level scan with (−cos, token) ordering."""
    scored = []
    for tok, vec in zip(tokens, unit_vectors):
        if tok == exclude_token:
            continue
        scored.append((float(np.dot(vec, query_vec)), tok))
    scored.sort(key=lambda item: (-item[0], item[1]))
    return [(tok, cos) for cos, tok in scored[:k]]


# ------------------------------------------- reference objectives (by term)

def _softmax_nll(output_table: np.ndarray, input_vec: np.ndarray, target: int) -> float:
    scores = output_table @ input_vec
    m = scores.max()
    return float(m + np.log(np.sum(np.exp(scores - m))) - scores[target])


def _tree_nll(tree, output_table: np.ndarray, input_vec: np.ndarray, target: int) -> float:
    total = 0.0
    for node, bit in zip(tree.paths[target], tree.codes[target]):
        x = float(output_table[node] @ input_vec)
        p1 = 1.0 / (1.0 + np.exp(-x))
        total -= np.log(p1 if bit == 1 else 1.0 - p1)
    return total


def _target_nll(params: ModelParams, side: str, input_vec: np.ndarray, target: int) -> float:
    if params.config.softmax_mode == "exact":
        return _softmax_nll(params.out_table(side), input_vec, target)
    return _tree_nll(params.tree(side), params.out_table(side), input_vec, target)


def reference_skipgram_objective(params: ModelParams, sequences, window: int) -> float:
    """Plain skip-gram over id sequences: predict each neighbor within
    ``window`` from the current id's input vector."""
    total = 0.0
    for seq in sequences:
        for m in range(len(seq)):
            v = params.doc_in[int(seq[m])]
            for i in range(max(0, m - window), min(len(seq), m + window + 1)):
                if i != m:
                    total += _target_nll(params, "doc", v, int(seq[i]))
    return total


def reference_cbow_doc_objective(params: ModelParams, sequences, bodies, window: int) -> float:
    """Word CBOW with the document vector added to every context: predict
    each body token from the average of the doc vector and the window."""
    total = 0.0
    for seq in sequences:
        for d in seq:
            body = bodies[int(d)]
            for t in range(len(body)):
                ctx = [params.doc_in[int(d)]]
                for j in range(max(0, t - window), min(len(body), t + window + 1)):
                    if j != t:
                        ctx.append(params.word_in[int(body[j])])
                v = np.mean(ctx, axis=0)
                total += _target_nll(params, "word", v, int(body[t]))
    return total


def reference_content_objective(params: ModelParams, sequences, bodies) -> float:
    """Predict each document from the plain average of its body vectors."""
    total = 0.0
    for seq in sequences:
        for d in seq:
            body = bodies[int(d)]
            if len(body) == 0:
                continue
            v = np.mean([params.word_in[int(w)] for w in body], axis=0)
            total += _target_nll(params, "doc", v, int(d))
    return total


# ----------------------------------------------------------- random fixtures

def make_random_params(
    rng: np.random.Generator,
    docs: int,
    words: int,
    dim: int,
    softmax_mode: str,
    scale: float = 0.5,
    **config_kw,
) -> ModelParams:
    """A ModelParams with random tables, bypassing corpus construction."""
    from hdv.huffman import build_tree

    config = TrainConfig(dim=dim, softmax_mode=softmax_mode, **config_kw)
    doc_vocab = Vocabulary(
        [f"d{i}" for i in range(docs)],
        np.asarray(rng.integers(1, 50, size=docs), dtype=np.int64),
    )
    word_vocab = Vocabulary(
        [f"w{i}" for i in range(words)],
        np.asarray(rng.integers(1, 50, size=words), dtype=np.int64),
    )
    doc_tree = word_tree = None
    if softmax_mode == "hierarchical":
        doc_tree = build_tree([int(f) for f in doc_vocab.freqs])
        word_tree = build_tree([int(f) for f in word_vocab.freqs]) if words else None
        doc_out = rng.normal(0, scale, size=(doc_tree.internal_count, dim))
        word_out = (
            rng.normal(0, scale, size=(word_tree.internal_count, dim))
            if word_tree is not None
            else np.zeros((0, dim))
        )
    else:
        doc_out = rng.normal(0, scale, size=(docs, dim))
        word_out = rng.normal(0, scale, size=(words, dim))
    return ModelParams(
        config=config,
        word_vocab=word_vocab,
        doc_vocab=doc_vocab,
        doc_in=rng.normal(0, scale, size=(docs, dim)),
        word_in=rng.normal(0, scale, size=(words, dim)),
        doc_out=doc_out,
        word_out=word_out,
        doc_tree=doc_tree,
        word_tree=word_tree,
    )


def random_example(rng: np.random.Generator, params: ModelParams) -> TrainingExample:
    """A random valid example of a random kind for the given tables."""
    docs = len(params.doc_vocab)
    words = len(params.word_vocab)
    kind = rng.choice(["stream", "word", "content"]) if words else "stream"
    if kind == "stream":
        n_ctx = int(rng.integers(1, 4))
        return TrainingExample(
            "stream",
            int(rng.integers(docs)),
            np.asarray(rng.integers(0, docs, size=n_ctx), dtype=np.int32),
            np.empty(0, dtype=np.int32),
        )
    if kind == "word":
        n_ctx = int(rng.integers(0, 4))
        return TrainingExample(
            "word",
            int(rng.integers(words)),
            np.asarray([rng.integers(docs)], dtype=np.int32),
            np.asarray(rng.integers(0, words, size=n_ctx), dtype=np.int32),
        )
    n_body = int(rng.integers(1, 6))
    return TrainingExample(
        "content",
        int(rng.integers(docs)),
        np.empty(0, dtype=np.int32),
        np.asarray(rng.integers(0, words, size=n_body), dtype=np.int32),
    )
