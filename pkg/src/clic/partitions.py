"""Set partitions as label vectors, contingency tables and comparison metrics.

Partitions are carried as 1-D integer arrays of 1-based labels in
first-appearance (canonical) order, e.g. ``(2, 2, 5, 2) -> (1, 1, 2, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_ENUMERATION_N = 12


def canonicalize(raw_labels) -> np.ndarray:
    """Relabel by order of first appearance, starting from 1."""
    raw = np.asarray(raw_labels)
    if raw.ndim != 1 or raw.size == 0:
        raise ValueError("labels must be a nonempty 1-D sequence")
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    # rank of each unique value by where it first occurs
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(1, first.size + 1)
    return rank[inverse.ravel()]


def n_clusters(labels) -> int:
    return int(np.unique(np.asarray(labels)).size)


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-partition counts ``counts[k1, k2] = #{i : c1_i = k1, c2_i = k2}``."""

    counts: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


def _check_pair(c1, c2) -> tuple[np.ndarray, np.ndarray]:
    a = canonicalize(c1)
    b = canonicalize(c2)
    if a.size != b.size:
        raise ValueError(f"partitions have different lengths ({a.size} != {b.size})")
    return a, b


def contingency(c1, c2) -> ContingencyTable:
    a, b = _check_pair(c1, c2)
    counts = np.zeros((a.max(), b.max()), dtype=np.int64)
    np.add.at(counts, (a - 1, b - 1), 1)
    return ContingencyTable(counts)


def _pairs(x) -> np.ndarray | int:
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1.0) / 2.0


def rand_index(c1, c2) -> float:
    """Fraction of object pairs on which the two partitions agree."""
    table = contingency(c1, c2)
    n = table.n
    if n < 2:
        raise ValueError("the Rand index needs at least two objects")
    both = _pairs(table.counts).sum()
    same1 = _pairs(table.row_sums).sum()
    same2 = _pairs(table.col_sums).sum()
    disagree = same1 + same2 - 2.0 * both
    return float(1.0 - disagree / _pairs(n))


def adjusted_rand_index(c1, c2) -> float:
    """Hubert-Arabie adjusted Rand index.

    When the chance-corrected denominator vanishes (both partitions all
    singletons, or both a single block) the index is 1.0 for identical
    partitions and undefined otherwise, in which case ``ValueError`` is raised.
    """
    table = contingency(c1, c2)
    n = table.n
    if n < 2:
        raise ValueError("the adjusted Rand index needs at least two objects")
    index = _pairs(table.counts).sum()
    sum1 = _pairs(table.row_sums).sum()
    sum2 = _pairs(table.col_sums).sum()
    expected = sum1 * sum2 / _pairs(n)
    maximum = 0.5 * (sum1 + sum2)
    denom = maximum - expected
    if denom == 0.0:
        if np.array_equal(canonicalize(c1), canonicalize(c2)):
            return 1.0
        raise ValueError("adjusted Rand index is undefined for these partitions")
    return float((index - expected) / denom)


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def variation_of_information(c1, c2) -> float:
    """VI distance ``H(C1) + H(C2) - 2 I(C1, C2)`` in nats."""
    table = contingency(c1, c2)
    n = table.n
    h_joint = _entropy(table.counts.ravel(), n)
    h1 = _entropy(table.row_sums, n)
    h2 = _entropy(table.col_sums, n)
    # VI = 2 H(joint) - H1 - H2; clamp rounding noise for identical inputs
    return max(0.0, 2.0 * h_joint - h1 - h2)


def enumerate_partitions(n: int) -> list[np.ndarray]:
    """All set partitions of ``n`` objects as canonical label vectors.

    Generated as restricted-growth strings, so no deduplication is needed.
    """
    if not 1 <= n <= MAX_ENUMERATION_N:
        raise ValueError(f"n must lie in [1, {MAX_ENUMERATION_N}], got {n}")
    out = []
    labels = [1] * n

    def grow(i: int, k: int) -> None:
        if i == n:
            out.append(np.array(labels, dtype=np.int64))
            return
        for lab in range(1, k + 2):
            labels[i] = lab
            grow(i + 1, max(k, lab))

    grow(1, 1)
    return out
