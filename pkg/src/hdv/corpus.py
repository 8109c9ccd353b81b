"""Corpus ingestion: vocabularies and integer-indexed document streams.

Input is a stream file (one document-id sequence per line) plus a content
file mapping each document id to its body text.  Bodies are keyed by
document id: a document may recur across sequences but its content is
fixed.  Word frequencies count token occurrences per *sequence
occurrence* of a document, matching how often each token is actually seen
during training.
"""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import CorpusFormatError

_EDGE_PUNCT = string.punctuation


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation at token edges."""
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_PUNCT)
        if tok:
            out.append(tok)
    return out


@dataclass
class Vocabulary:
    """Dense-id token table with occurrence frequencies."""

    tokens: list[str]
    freqs: np.ndarray
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def id_of(self, token: str) -> int:
        return self.index[token]


@dataclass
class Corpus:
    """Immutable training data: two vocabularies plus indexed sequences.

    ``sequences`` holds document ids in stream order; ``bodies[doc_id]``
    holds that document's word ids (shared by every occurrence of the
    document).  Documents whose pruned body is empty stay in the
    sequences; sequences left with no retained documents are dropped.
    """

    word_vocab: Vocabulary
    doc_vocab: Vocabulary
    sequences: list[np.ndarray]
    bodies: list[np.ndarray]

    def body(self, doc_id: int) -> np.ndarray:
        return self.bodies[doc_id]


class SequenceStats(NamedTuple):
    sequences: int
    documents: int
    words: int
    total_tokens: int


def corpus_from_sequences(
    doc_sequences: list[list[str]],
    bodies_by_doc: dict[str, list[str]],
    min_count_word: int = 5,
    min_count_doc: int = 1,
    stopwords: set[str] | None = None,
) -> Corpus:
    """Assemble a Corpus from already-tokenized in-memory data.

    Stopwords are removed from bodies before any counting.  Documents and
    words below their min_count are dropped (documents from the sequences,
    words from the bodies).  Ids are assigned by first appearance, so the
    result is deterministic for identical inputs.
    """
    for seq in doc_sequences:
        for doc in seq:
            if doc not in bodies_by_doc:
                raise CorpusFormatError(
                    f"document '{doc}' referenced in stream but absent from content file"
                )

    if stopwords:
        bodies_by_doc = {
            d: [w for w in body if w not in stopwords] for d, body in bodies_by_doc.items()
        }

    doc_counts = Counter(doc for seq in doc_sequences for doc in seq)
    kept_sequences = []
    for seq in doc_sequences:
        kept = [d for d in seq if doc_counts[d] >= min_count_doc]
        if kept:
            kept_sequences.append(kept)

    doc_tokens: list[str] = []
    doc_index: dict[str, int] = {}
    for seq in kept_sequences:
        for doc in seq:
            if doc not in doc_index:
                doc_index[doc] = len(doc_tokens)
                doc_tokens.append(doc)
    doc_freqs = np.array([doc_counts[d] for d in doc_tokens], dtype=np.int64)

    # One count pass per distinct document, weighted by its occurrences.
    word_counts: Counter[str] = Counter()
    for doc in doc_tokens:
        occ = doc_counts[doc]
        for w, k in Counter(bodies_by_doc[doc]).items():
            word_counts[w] += k * occ

    word_tokens: list[str] = []
    word_index: dict[str, int] = {}
    for doc in doc_tokens:
        for w in bodies_by_doc[doc]:
            if word_counts[w] >= min_count_word and w not in word_index:
                word_index[w] = len(word_tokens)
                word_tokens.append(w)
    word_freqs = np.array([word_counts[w] for w in word_tokens], dtype=np.int64)

    bodies = [
        np.array(
            [word_index[w] for w in bodies_by_doc[doc] if w in word_index], dtype=np.int32
        )
        for doc in doc_tokens
    ]
    sequences = [
        np.array([doc_index[d] for d in seq], dtype=np.int32) for seq in kept_sequences
    ]
    return Corpus(
        word_vocab=Vocabulary(word_tokens, word_freqs),
        doc_vocab=Vocabulary(doc_tokens, doc_freqs),
        sequences=sequences,
        bodies=bodies,
    )


def _read_stopwords(path) -> set[str]:
    out = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            tok = line.strip().lower()
            if tok:
                out.add(tok)
    return out


def build_corpus(
    stream_file,
    content_file,
    min_count_word: int = 5,
    min_count_doc: int = 1,
    stopwords=None,
) -> Corpus:
    """Read the stream and content files and build an indexed Corpus.

    Stream file: one sequence per line, document ids separated by spaces.
    Content file: one document per line, ``<doc_id>\\t<body text>``.
    Empty lines are skipped in both files.
    """
    bodies_by_doc: dict[str, list[str]] = {}
    with open(content_file, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise CorpusFormatError(
                    f"{content_file}:{lineno}: expected '<doc_id>\\t<body text>'"
                )
            doc_id, text = line.split("\t", 1)
            doc_id = doc_id.strip()
            if not doc_id:
                raise CorpusFormatError(f"{content_file}:{lineno}: empty document id")
            if doc_id in bodies_by_doc:
                raise CorpusFormatError(
                    f"{content_file}:{lineno}: duplicate content for document '{doc_id}'"
                )
            bodies_by_doc[doc_id] = tokenize(text)

    doc_sequences: list[list[str]] = []
    with open(stream_file, encoding="utf-8") as fh:
        for line in fh:
            ids = line.split()
            if ids:
                doc_sequences.append(ids)

    stop = _read_stopwords(stopwords) if stopwords is not None else None
    return corpus_from_sequences(
        doc_sequences,
        bodies_by_doc,
        min_count_word=min_count_word,
        min_count_doc=min_count_doc,
        stopwords=stop,
    )


def sequence_stats(corpus: Corpus) -> SequenceStats:
    """Exact counts: sequences, distinct documents, distinct words, and the
    total number of body tokens summed over document *occurrences*."""
    total = sum(int(len(corpus.bodies[d])) for seq in corpus.sequences for d in seq)
    return SequenceStats(
        sequences=len(corpus.sequences),
        documents=len(corpus.doc_vocab),
        words=len(corpus.word_vocab),
        total_tokens=total,
    )
