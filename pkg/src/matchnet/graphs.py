"""Random friendship-graph realization.

Within a gender, agents of types (h, l) form a two-block inhomogeneous
random graph: every unordered pair is linked independently with the
block probability s_e * s_e' / y, y the realized aggregate effort of
that gender.  Realization is O(expected edges): per block, the edge
count is drawn binomially and that many distinct pairs are sampled
uniformly (draw, canonicalize, deduplicate, top up).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class GenderGraph:
    """CSR adjacency of one gender's friendship network."""

    indptr: np.ndarray
    indices: np.ndarray
    clipped_pairs: int

    @property
    def edge_count(self) -> int:
        return int(self.indices.size) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]


def _sample_pairs(rng: np.random.Generator, m1: int, m2: int, k: int,
                  same_block: bool) -> tuple[np.ndarray, np.ndarray]:
    """k distinct uniform pairs; rows from [0, m1), cols from [0, m2).

    Same-block pairs are unordered (i < j).  Duplicates are rejected
    and redrawn; for sparse graphs the expected number of redraws is
    negligible.
    """
    ii = np.empty(0, dtype=np.int64)
    jj = np.empty(0, dtype=np.int64)
    width = m1 if same_block else m2
    while ii.size < k:
        need = k - ii.size
        a = rng.integers(0, m1, size=2 * need + 8, dtype=np.int64)
        b = rng.integers(0, width, size=a.size, dtype=np.int64)
        if same_block:
            keep = a != b
            a, b = a[keep], b[keep]
            a, b = np.minimum(a, b), np.maximum(a, b)
        ii = np.concatenate([ii, a])
        jj = np.concatenate([jj, b])
        _, first = np.unique(ii * width + jj, return_index=True)
        first.sort()
        ii, jj = ii[first], jj[first]
    return ii[:k], jj[:k]


def _block_edges(rng: np.random.Generator, m1: int, m2: int, p_raw: float,
                 same_block: bool) -> tuple[np.ndarray, np.ndarray, int]:
    if same_block:
        n_pairs = m1 * (m1 - 1) // 2
    else:
        n_pairs = m1 * m2
    if n_pairs == 0 or p_raw <= 0.0:
        return np.empty(0, np.int64), np.empty(0, np.int64), 0
    clipped = n_pairs if p_raw > 1.0 else 0
    k = int(rng.binomial(n_pairs, min(p_raw, 1.0)))
    if k == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64), clipped
    ii, jj = _sample_pairs(rng, m1, m2, k, same_block)
    return ii, jj, clipped


def realize_gender_network(rng: np.random.Generator, n: int, n_high: int,
                           s_h: float, s_l: float) -> GenderGraph:
    """One gender's friendship graph; high types occupy ids [0, n_high)."""
    n_low = n - n_high
    y = n_high * s_h + n_low * s_l
    if y <= 0.0:
        return GenderGraph(np.zeros(n + 1, np.int64), np.empty(0, np.int64), 0)
    src_parts: list[np.ndarray] = []
    dst_parts: list[np.ndarray] = []
    clipped = 0
    i, j, c = _block_edges(rng, n_high, n_high, s_h * s_h / y, True)
    src_parts.append(i)
    dst_parts.append(j)
    clipped += c
    i, j, c = _block_edges(rng, n_high, n_low, s_h * s_l / y, False)
    src_parts.append(i)
    dst_parts.append(j + n_high)
    clipped += c
    i, j, c = _block_edges(rng, n_low, n_low, s_l * s_l / y, True)
    src_parts.append(i + n_high)
    dst_parts.append(j + n_high)
    clipped += c
    src = np.concatenate(src_parts + dst_parts)
    dst = np.concatenate(dst_parts + src_parts)
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, np.int64)
    np.add.at(indptr, src + 1, 1)
    return GenderGraph(np.cumsum(indptr), dst, clipped)
