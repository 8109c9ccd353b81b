"""Cosine top-K retrieval over the joint document/word space.

The index holds unit-normalized copies of the input embedding tables.
Retrieval is an exact scan: score every candidate, sort by descending
cosine with lexicographic token tie-break, truncate to K.  Zero-norm
vectors cannot participate in cosine ranking, so they are dropped at
build time and reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import UnknownTokenError
from .model import ModelParams

MODALITIES = ("word", "doc")


class Neighbor(NamedTuple):
    token: str
    cosine: float


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero-norm vectors")
    return float(np.dot(a, b) / (na * nb))


@dataclass
class QueryIndex:
    """Immutable normalized-vector store for both modalities.

    ``dropped`` lists (modality, token) pairs excluded for zero norm.
    """

    word_tokens: list[str]
    word_vectors: np.ndarray
    doc_tokens: list[str]
    doc_vectors: np.ndarray
    dropped: list[tuple[str, str]] = field(default_factory=list)
    _word_index: dict[str, int] = field(init=False, repr=False)
    _doc_index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._word_index = {t: i for i, t in enumerate(self.word_tokens)}
        self._doc_index = {t: i for i, t in enumerate(self.doc_tokens)}

    def tokens(self, modality: str) -> list[str]:
        return self.word_tokens if modality == "word" else self.doc_tokens

    def vectors(self, modality: str) -> np.ndarray:
        return self.word_vectors if modality == "word" else self.doc_vectors

    def lookup(self, token: str, modality: str) -> np.ndarray:
        table = self._word_index if modality == "word" else self._doc_index
        if token not in table:
            raise UnknownTokenError(f"token not in vocabulary: {modality} '{token}'")
        return self.vectors(modality)[table[token]]


def _normalize(tokens: list[str], vectors: np.ndarray, modality: str, dropped: list):
    norms = np.linalg.norm(vectors, axis=1)
    keep = norms > 0.0
    for i in np.flatnonzero(~keep):
        dropped.append((modality, tokens[int(i)]))
    kept_tokens = [t for t, k in zip(tokens, keep) if k]
    unit = vectors[keep] / norms[keep, None]
    return kept_tokens, unit


def build_index(
    word_tokens: list[str],
    word_vectors: np.ndarray,
    doc_tokens: list[str],
    doc_vectors: np.ndarray,
) -> QueryIndex:
    """Normalize raw vectors into a QueryIndex, excluding zero-norm rows."""
    dropped: list[tuple[str, str]] = []
    w_tok, w_vec = _normalize(word_tokens, np.asarray(word_vectors, dtype=np.float64), "word", dropped)
    d_tok, d_vec = _normalize(doc_tokens, np.asarray(doc_vectors, dtype=np.float64), "doc", dropped)
    return QueryIndex(w_tok, w_vec, d_tok, d_vec, dropped)


def index_from_model(params: ModelParams) -> QueryIndex:
    """Index the input embedding tables of a trained model."""
    return build_index(
        list(params.word_vocab.tokens),
        params.word_in,
        list(params.doc_vocab.tokens),
        params.doc_in,
    )


def nearest(
    index: QueryIndex,
    token: str,
    from_modality: str,
    to_modality: str,
    k: int,
) -> list[Neighbor]:
    """K highest-cosine neighbors of ``token`` in the target modality.

    The query itself is excluded when modalities match.  Ties are broken
    by token, ascending, making results independent of storage order.
    If k exceeds the candidate count, all candidates are returned.
    """
    if from_modality not in MODALITIES or to_modality not in MODALITIES:
        raise ValueError(f"modality must be one of {MODALITIES}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    q = index.lookup(token, from_modality)
    cands = index.tokens(to_modality)
    scores = index.vectors(to_modality) @ q
    ranked = sorted(
        (
            Neighbor(t, float(s))
            for t, s in zip(cands, scores)
            if not (to_modality == from_modality and t == token)
        ),
        key=lambda nb: (-nb.cosine, nb.token),
    )
    return ranked[:k]


def tag_document(index: QueryIndex, doc_token: str, k: int) -> list[Neighbor]:
    """Describe a document by its nearest words."""
    return nearest(index, doc_token, "doc", "word", k)


def recommend(index: QueryIndex, doc_token: str, k: int) -> list[Neighbor]:
    """Documents closest to a document."""
    return nearest(index, doc_token, "doc", "doc", k)
