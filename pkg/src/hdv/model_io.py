"""Model persistence and embedding export.

Model file layout: magic ``HDV1`` followed by a fixed order of framed
sections, each ``[tag u8][length u64][payload][crc32 u32]`` with every
multi-byte integer little-endian.  Parameter matrices are raw float64,
so a load reproduces training state bitwise.  Huffman trees are not
stored: the vocabulary frequencies suffice to rebuild them, and a stored
checksum of the rebuilt code books guards against any drift in the
construction.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import asdict

import numpy as np

from .errors import ModelFormatError
from .corpus import Vocabulary
from .huffman import HuffmanTree, build_tree
from .model import ModelParams, TrainConfig

MAGIC = b"HDV1"
FORMAT_VERSION = 1

TAG_HEADER = 1
TAG_WORD_VOCAB = 2
TAG_DOC_VOCAB = 3
TAG_WORD_IN = 4
TAG_DOC_IN = 5
TAG_WORD_OUT = 6
TAG_DOC_OUT = 7
TAG_TREE_CHECK = 8

_SECTION_ORDER = (
    TAG_HEADER,
    TAG_WORD_VOCAB,
    TAG_DOC_VOCAB,
    TAG_WORD_IN,
    TAG_DOC_IN,
    TAG_WORD_OUT,
    TAG_DOC_OUT,
    TAG_TREE_CHECK,
)


def _pack_vocab(vocab: Vocabulary) -> bytes:
    parts = [struct.pack("<Q", len(vocab))]
    for tok in vocab.tokens:
        raw = tok.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    parts.append(np.asarray(vocab.freqs, dtype="<i8").tobytes())
    return b"".join(parts)


def _unpack_vocab(payload: bytes) -> Vocabulary:
    (count,) = struct.unpack_from("<Q", payload, 0)
    off = 8
    tokens = []
    for _ in range(count):
        (n,) = struct.unpack_from("<I", payload, off)
        off += 4
        tokens.append(payload[off : off + n].decode("utf-8"))
        off += n
    freqs = np.frombuffer(payload, dtype="<i8", count=count, offset=off).astype(np.int64)
    return Vocabulary(tokens, freqs)


def _pack_matrix(mat: np.ndarray) -> bytes:
    rows, cols = mat.shape
    return struct.pack("<QQ", rows, cols) + np.ascontiguousarray(mat, dtype="<f8").tobytes()


def _unpack_matrix(payload: bytes) -> np.ndarray:
    rows, cols = struct.unpack_from("<QQ", payload, 0)
    flat = np.frombuffer(payload, dtype="<f8", count=rows * cols, offset=16)
    return flat.astype(np.float64).reshape(rows, cols)


def tree_checksum(tree: HuffmanTree) -> int:
    """CRC32 over every leaf's code length and bits, in leaf order."""
    crc = 0
    for code in tree.codes:
        crc = zlib.crc32(bytes([len(code)]) + code.tobytes(), crc)
    return crc


def _write_section(fh, tag: int, payload: bytes) -> None:
    fh.write(struct.pack("<BQ", tag, len(payload)))
    fh.write(payload)
    fh.write(struct.pack("<I", zlib.crc32(payload)))


def save_model(params: ModelParams, path) -> None:
    """Write the complete training state to ``path``."""
    header = {
        "format_version": FORMAT_VERSION,
        "dim": params.config.dim,
        "words": len(params.word_vocab),
        "docs": len(params.doc_vocab),
        "config": asdict(params.config),
    }
    if params.word_tree is not None:
        word_crc, doc_crc = tree_checksum(params.word_tree), tree_checksum(params.doc_tree)
        tree_payload = struct.pack("<BII", 1, word_crc, doc_crc)
    elif params.doc_tree is not None:
        tree_payload = struct.pack("<BII", 2, 0, tree_checksum(params.doc_tree))
    else:
        tree_payload = struct.pack("<BII", 0, 0, 0)
    sections = {
        TAG_HEADER: json.dumps(header, sort_keys=True).encode("utf-8"),
        TAG_WORD_VOCAB: _pack_vocab(params.word_vocab),
        TAG_DOC_VOCAB: _pack_vocab(params.doc_vocab),
        TAG_WORD_IN: _pack_matrix(params.word_in),
        TAG_DOC_IN: _pack_matrix(params.doc_in),
        TAG_WORD_OUT: _pack_matrix(params.word_out),
        TAG_DOC_OUT: _pack_matrix(params.doc_out),
        TAG_TREE_CHECK: tree_payload,
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        for tag in _SECTION_ORDER:
            _write_section(fh, tag, sections[tag])


def _read_exact(fh, n: int, path, offset: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise ModelFormatError(
            f"{path}: truncated file at offset {offset}: expected {n} bytes of {what}"
        )
    return data


def _read_section(fh, path, offset: int, expect_tag: int) -> tuple[bytes, int]:
    head = _read_exact(fh, 9, path, offset, "section header")
    tag, length = struct.unpack("<BQ", head)
    if tag != expect_tag:
        raise ModelFormatError(
            f"{path}: section tag {tag} at offset {offset}, expected {expect_tag}"
        )
    payload = _read_exact(fh, length, path, offset + 9, f"section {tag} payload")
    (stored,) = struct.unpack("<I", _read_exact(fh, 4, path, offset + 9 + length, "checksum"))
    if zlib.crc32(payload) != stored:
        raise ModelFormatError(
            f"{path}: checksum mismatch in section {tag} at offset {offset}"
        )
    return payload, offset + 9 + length + 4


def load_model(path) -> ModelParams:
    """Read a model file, rebuilding and verifying Huffman structures."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ModelFormatError(f"{path}: not a model file (bad magic {magic!r})")
        offset = 4
        payloads = {}
        for tag in _SECTION_ORDER:
            payloads[tag], offset = _read_section(fh, path, offset, tag)
        if fh.read(1):
            raise ModelFormatError(f"{path}: trailing data after offset {offset}")

    header = json.loads(payloads[TAG_HEADER].decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format version {header.get('format_version')!r}"
        )
    config = TrainConfig(**header["config"])
    word_vocab = _unpack_vocab(payloads[TAG_WORD_VOCAB])
    doc_vocab = _unpack_vocab(payloads[TAG_DOC_VOCAB])
    if len(word_vocab) != header["words"] or len(doc_vocab) != header["docs"]:
        raise ModelFormatError(f"{path}: vocabulary sizes disagree with header")

    word_tree = doc_tree = None
    has_trees, word_crc, doc_crc = struct.unpack("<BII", payloads[TAG_TREE_CHECK])
    if config.softmax_mode == "hierarchical":
        doc_tree = build_tree([int(f) for f in doc_vocab.freqs])
        if tree_checksum(doc_tree) != doc_crc:
            raise ModelFormatError(f"{path}: rebuilt document code book fails checksum")
        if has_trees == 1:
            word_tree = build_tree([int(f) for f in word_vocab.freqs])
            if tree_checksum(word_tree) != word_crc:
                raise ModelFormatError(f"{path}: rebuilt word code book fails checksum")

    params = ModelParams(
        config=config,
        word_vocab=word_vocab,
        doc_vocab=doc_vocab,
        doc_in=_unpack_matrix(payloads[TAG_DOC_IN]),
        word_in=_unpack_matrix(payloads[TAG_WORD_IN]),
        doc_out=_unpack_matrix(payloads[TAG_DOC_OUT]),
        word_out=_unpack_matrix(payloads[TAG_WORD_OUT]),
        doc_tree=doc_tree,
        word_tree=word_tree,
    )
    for name, mat, rows in (
        ("word_in", params.word_in, len(word_vocab)),
        ("doc_in", params.doc_in, len(doc_vocab)),
    ):
        if mat.shape != (rows, config.dim):
            raise ModelFormatError(f"{path}: {name} shape {mat.shape} disagrees with header")
    return params


MODALITY_CHOICES = ("word", "doc", "both")
FORMAT_CHOICES = ("text", "binary")


def _export_rows(params: ModelParams, modality: str):
    if modality not in MODALITY_CHOICES:
        raise ValueError(f"modality must be one of {MODALITY_CHOICES}")
    rows = []
    if modality in ("word", "both"):
        rows += list(zip(params.word_vocab.tokens, params.word_in))
    if modality in ("doc", "both"):
        prefix = "doc:" if modality == "both" else ""
        rows += [(prefix + t, v) for t, v in zip(params.doc_vocab.tokens, params.doc_in)]
    return rows


def export_embeddings(params: ModelParams, modality: str, path, fmt: str = "text") -> None:
    """Write input vectors for one or both modalities.

    Text: header ``V D`` then one ``token v1 .. vD`` line per vector with
    6 significant digits.  Binary: same header line, then per row the
    token, one space, and D little-endian float32 values ending with a
    newline.  Documents get a ``doc:`` prefix only when both modalities
    share the file.
    """
    if fmt not in FORMAT_CHOICES:
        raise ValueError(f"format must be one of {FORMAT_CHOICES}")
    rows = _export_rows(params, modality)
    d = params.config.dim
    if fmt == "text":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(rows)} {d}\n")
            for tok, vec in rows:
                fh.write(tok + " " + " ".join(f"{x:.6g}" for x in vec) + "\n")
    else:
        with open(path, "wb") as fh:
            fh.write(f"{len(rows)} {d}\n".encode("utf-8"))
            for tok, vec in rows:
                fh.write(tok.encode("utf-8") + b" ")
                fh.write(np.asarray(vec, dtype="<f4").tobytes())
                fh.write(b"\n")


def load_text_embeddings(path) -> tuple[list[str], np.ndarray]:
    """Read the text export format back into (tokens, matrix)."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().split()
        if len(first) != 2 or not all(p.isdigit() for p in first):
            raise ModelFormatError(f"{path}: malformed embedding header")
        count, dim = int(first[0]), int(first[1])
        tokens, vecs = [], np.empty((count, dim))
        for i in range(count):
            parts = fh.readline().split()
            if len(parts) != dim + 1:
                raise ModelFormatError(f"{path}: malformed embedding row {i + 1}")
            tokens.append(parts[0])
            try:
                vecs[i] = [float(x) for x in parts[1:]]
            except ValueError as exc:
                raise ModelFormatError(f"{path}: malformed embedding row {i + 1}") from exc
    return tokens, vecs


def split_embedding_rows(tokens: list[str], vectors: np.ndarray):
    """Separate ``doc:``-prefixed rows from word rows of a joint export."""
    w_tok, w_idx, d_tok, d_idx = [], [], [], []
    for i, tok in enumerate(tokens):
        if tok.startswith("doc:"):
            d_tok.append(tok[4:])
            d_idx.append(i)
        else:
            w_tok.append(tok)
            w_idx.append(i)
    return w_tok, vectors[w_idx], d_tok, vectors[d_idx]
