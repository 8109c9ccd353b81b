"""Optimal binary prefix-code trees over token frequencies.

Frequent tokens get short codes, so the per-example cost of a
hierarchical softmax (proportional to code length) stays logarithmic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HuffmanTree:
    """Per-leaf binary codes and root-to-leaf internal-node paths.

    ``codes[i]`` is the bit sequence of leaf ``i`` (uint8, root first) and
    ``paths[i]`` the ids of the internal nodes visited on the way down;
    the two always have equal length.  Internal node ids are assigned in
    merge order, so the root is ``leaf_count - 2`` whenever the tree has
    more than one leaf.
    """

    leaf_count: int
    internal_count: int
    codes: list[np.ndarray]
    paths: list[np.ndarray]

    @property
    def root(self) -> int:
        return self.internal_count - 1

    def code_lengths(self) -> np.ndarray:
        return np.array([len(c) for c in self.codes], dtype=np.int64)


def build_tree(frequencies) -> HuffmanTree:
    """Build the minimum-weighted-length prefix code for `frequencies`.

    Deterministic: ties between equal-weight merge candidates are broken
    in favor of the node created earliest (leaves in input order first,
    then internal nodes in merge order).  A single-leaf input yields the
    degenerate tree with a zero-length code.
    """
    freqs = [int(f) for f in frequencies]
    if not freqs:
        raise ValueError("cannot build a prefix-code tree from an empty frequency list")
    if any(f < 1 for f in freqs):
        raise ValueError("all frequencies must be >= 1")
    n = len(freqs)
    if n == 1:
        return HuffmanTree(1, 0, [np.zeros(0, np.uint8)], [np.zeros(0, np.int32)])

    # Heap entries are (weight, creation_order, node_id); node ids < n are
    # leaves, ids >= n are internal nodes numbered n + merge_index.
    heap = [(f, i, i) for i, f in enumerate(freqs)]
    heapq.heapify(heap)
    left = [0] * (n - 1)
    right = [0] * (n - 1)
    for merge in range(n - 1):
        w_a, _, a = heapq.heappop(heap)
        w_b, _, b = heapq.heappop(heap)
        left[merge] = a
        right[merge] = b
        node = n + merge
        heapq.heappush(heap, (w_a + w_b, node, node))

    codes: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    paths: list[np.ndarray] = [None] * n  # type: ignore[list-item]
    stack = [(n + n - 2, [], [])]  # root is the last merge
    while stack:
        node, bits, path = stack.pop()
        if node < n:
            codes[node] = np.array(bits, dtype=np.uint8)
            paths[node] = np.array(path, dtype=np.int32)
        else:
            m = node - n
            stack.append((left[m], bits + [0], path + [m]))
            stack.append((right[m], bits + [1], path + [m]))
    return HuffmanTree(n, n - 1, codes, paths)


def expected_code_length(tree: HuffmanTree, frequencies) -> float:
    """Frequency-weighted mean code length, sum(f_i * len_i) / sum(f_i)."""
    freqs = np.asarray(list(frequencies), dtype=np.float64)
    if len(freqs) != tree.leaf_count:
        raise ValueError(
            f"frequency count {len(freqs)} does not match leaf count {tree.leaf_count}"
        )
    return float(np.dot(freqs, tree.code_lengths()) / freqs.sum())
