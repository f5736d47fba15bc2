"""Synthetic multiview datasets with known, dependent view partitions.

All generators return 1-based labels and data arrays of shape ``(n, d_v)``.
The second argument of each Gaussian is a variance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SyntheticDataset:
    views: list
    labels: list
    model: str = "uncorrelated"
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.views[0].shape[0]


def _check_n(n):
    if n < 2:
        raise ValueError("n must be >= 2")


def _fair(n, rng):
    return rng.integers(1, 3, n)


def _sign(labels, flip=False):
    # (-1)^(c + 1): +1 for cluster 1, -1 for cluster 2; flip gives (-1)^c
    s = np.where(labels == 1, 1.0, -1.0)
    return -s if flip else s


def _two_view_labels(case: int, n: int, rng):
    if case not in (1, 2, 3):
        raise ValueError(f"case must be 1, 2 or 3, got {case}")
    c1 = _fair(n, rng)
    c2_ind = _fair(n, rng)
    if case == 1:
        c2 = c1.copy()
    elif case == 3:
        c2 = c2_ind
    else:
        # a tied draw w.p. 2/3, an independent pair otherwise; c1 stays fair
        tied = rng.random(n) < 2.0 / 3.0
        c2 = np.where(tied, c1, c2_ind)
    return c1, c2


def gen_two_view(case: int, eta2: float, n: int, rng: np.random.Generator) -> SyntheticDataset:
    """Two scalar views with means +/-1, variances 0.2 and ``eta2``."""
    _check_n(n)
    if not eta2 > 0:
        raise ValueError("eta2 must be positive")
    c1, c2 = _two_view_labels(case, n, rng)
    x1 = _sign(c1) + np.sqrt(0.2) * rng.standard_normal(n)
    x2 = _sign(c2, flip=True) + np.sqrt(eta2) * rng.standard_normal(n)
    return SyntheticDataset(
        [x1[:, None], x2[:, None]], [c1, c2],
        metadata={"scenario": "two-view", "case": case, "eta2": eta2, "n": n},
    )


def gen_correlated(case: int, eta2: float, n: int, rng: np.random.Generator) -> SyntheticDataset:
    """View 2 is regressed on view 1 with slope -1 (cluster 1) or +1 (cluster 2)."""
    _check_n(n)
    if not eta2 > 0:
        raise ValueError("eta2 must be positive")
    c1, c2 = _two_view_labels(case, n, rng)
    x1 = _sign(c1) + np.sqrt(0.2) * rng.standard_normal(n)
    x2 = _sign(c2, flip=True) * x1 + np.sqrt(eta2) * rng.standard_normal(n)
    return SyntheticDataset(
        [x1[:, None], x2[:, None]], [c1, c2], model="correlated",
        metadata={"scenario": "correlated", "case": case, "eta2": eta2, "n": n},
    )


def gen_three_view(n: int, rng: np.random.Generator) -> SyntheticDataset:
    """Three scalar views whose labels follow a non-tree dependence graph.

    ``c2`` copies ``c1`` w.p. 1/3 and takes the other cluster otherwise;
    ``c3`` copies ``c1`` or ``c2`` w.p. 1/3 each, else is a fresh fair draw.
    """
    _check_n(n)
    c1 = _fair(n, rng)
    c2 = np.where(rng.random(n) < 1.0 / 3.0, c1, 3 - c1)
    u = rng.random(n)
    c3 = np.where(u < 1.0 / 3.0, c1, np.where(u < 2.0 / 3.0, c2, _fair(n, rng)))
    x1 = _sign(c1) + np.sqrt(0.2) * rng.standard_normal(n)
    x2 = _sign(c2, flip=True) + np.sqrt(0.2) * rng.standard_normal(n)
    x3 = 2.0 * _sign(c3) + rng.standard_normal(n)
    return SyntheticDataset(
        [x1[:, None], x2[:, None], x3[:, None]], [c1, c2, c3],
        metadata={"scenario": "three-view", "n": n},
    )


def alternating(d: int) -> np.ndarray:
    """``(1, -1, 1, ...)`` of length ``d``."""
    return np.where(np.arange(d) % 2 == 0, 1.0, -1.0)


def gen_varying(n: int, d2: int, rng: np.random.Generator) -> SyntheticDataset:
    """Two-dimensional view 1 and ``d2``-dimensional view 2, variance 0.4 per coordinate.

    ``c2`` copies ``c1`` w.p. 0.8, else is an independent fair draw.
    """
    _check_n(n)
    if d2 < 1:
        raise ValueError("d2 must be >= 1")
    c1 = _fair(n, rng)
    c2 = np.where(rng.random(n) < 0.8, c1, _fair(n, rng))
    m1 = alternating(2)
    m2 = alternating(d2)
    sd = np.sqrt(0.4)
    x1 = _sign(c1)[:, None] * m1[None, :] + sd * rng.standard_normal((n, 2))
    x2 = _sign(c2)[:, None] * m2[None, :] + sd * rng.standard_normal((n, d2))
    return SyntheticDataset(
        [x1, x2], [c1, c2], metadata={"scenario": "varying", "n": n, "d2": d2},
    )
