"""Regenerate the committed golden model used by the format tests.

The file pins the on-disk byte layout: tests load it and compare query
results against frozen literals, so a format or endianness regression
shows up as a checksum or neighbour mismatch.  Only rerun this (and
refresh the literals in tests/test_io.py) after a deliberate format
version bump.

Usage: python3 scripts/make_golden.py [out_path]
"""

import sys
from pathlib import Path

from hdv.corpus import corpus_from_sequences
from hdv.model import TrainConfig
from hdv.model_io import save_model
from hdv.query import index_from_model, nearest
from hdv.trainer import train

SEQUENCES = [
    ["red", "blue", "red", "green"],
    ["green", "blue", "red"],
    ["red", "green", "blue"],
]
BODIES = {
    "red": ["apple", "cherry", "tomato", "apple", "brick"],
    "blue": ["sky", "ocean", "jeans", "sky", "ink"],
    "green": ["leaf", "lime", "moss", "leaf", "fern"],
}
CONFIG = TrainConfig(
    dim=8,
    stream_window=2,
    word_window=2,
    epochs=20,
    seed=11,
    softmax_mode="hierarchical",
)


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/data/golden.hdv")
    corpus = corpus_from_sequences(SEQUENCES, BODIES, min_count_word=1)
    params, _ = train(corpus, CONFIG)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(params, out)
    print(f"wrote {out} ({out.stat().st_size} bytes)")

    index = index_from_model(params)
    for token, src, dst, k in [
        ("apple", "word", "word", 3),
        ("red", "doc", "doc", 2),
        ("blue", "doc", "word", 3),
    ]:
        got = nearest(index, token, src, dst, k)
        print(f"{src}->{dst} {token}: " + repr([(n.token, round(n.cosine, 6)) for n in got]))


if __name__ == "__main__":
    main()
