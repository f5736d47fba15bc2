"""Posterior summaries of a sampler trace: co-clustering probabilities, VI
point estimates, dependence and cluster-count posteriors, and ESS."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _fast
from .partitions import adjusted_rand_index, canonicalize
from .sampler import PosteriorTrace

MAX_CANDIDATES = 2000
MAX_REFERENCES = 2000


def _view_labels(trace: PosteriorTrace, view: int) -> np.ndarray:
    if trace.n_draws == 0:
        raise ValueError("trace has no draws")
    if not 0 <= view < trace.num_views:
        raise ValueError(f"view index {view} out of range")
    return np.asarray(trace.labels[:, view], dtype=np.int64)


def posterior_similarity(trace: PosteriorTrace, view: int, chunk: int = 1000) -> np.ndarray:
    """Fraction of draws in which each pair of objects shares a cluster."""
    labels = _view_labels(trace, view)
    T, n = labels.shape
    K = int(labels.max()) + 1
    psm = np.zeros((n, n))
    for start in range(0, T, chunk):
        block = labels[start : start + chunk]
        onehot = np.zeros((block.shape[0], n, K))
        np.put_along_axis(onehot, block[:, :, None], 1.0, axis=2)
        psm += np.einsum("tik,tjk->ij", onehot, onehot)
    return psm / T


def _canonical_rows(labels: np.ndarray) -> np.ndarray:
    return np.stack([canonicalize(row) for row in labels])


def expected_vi(trace: PosteriorTrace, view: int, max_candidates: int = MAX_CANDIDATES,
                max_references: int = MAX_REFERENCES, seed: int = 0):
    """Monte Carlo posterior expected VI loss of candidate partitions.

    Candidates are the distinct kept draws in order of first appearance;
    references are all kept draws, weighted by multiplicity. Either set is
    subsampled (with the given seed) when it exceeds its cap.

    Returns ``(candidates, losses, first_draw_index)``.
    """
    canon = _canonical_rows(_view_labels(trace, view))
    uniq, first, inverse, counts = np.unique(
        canon, axis=0, return_index=True, return_inverse=True, return_counts=True)
    order = np.argsort(first, kind="stable")
    uniq, first, counts = uniq[order], first[order], counts[order]
    rng = np.random.default_rng(seed)
    if uniq.shape[0] > max_candidates:
        keep = np.sort(rng.choice(uniq.shape[0], max_candidates, replace=False))
        candidates, cand_first = uniq[keep], first[keep]
    else:
        candidates, cand_first = uniq, first
    if uniq.shape[0] > max_references:
        draws = rng.choice(canon.shape[0], max_references, replace=False)
        refs, weights = np.unique(canon[draws], axis=0, return_counts=True)
    else:
        refs, weights = uniq, counts
    n_labels = int(max(candidates.max(), refs.max()))
    dist = _fast.vi_matrix(np.ascontiguousarray(candidates - 1),
                           np.ascontiguousarray(refs - 1), n_labels)
    losses = dist @ (weights / weights.sum())
    return candidates, losses, cand_first


def minimize_vi(trace: PosteriorTrace, view: int, **kwargs) -> np.ndarray:
    """Kept draw with the smallest posterior expected VI loss.

    Ties (within floating-point rounding) go to the draw that appeared first.
    """
    candidates, losses, _ = expected_vi(trace, view, **kwargs)
    best = losses.min()
    return candidates[int(np.argmax(losses <= best + 1e-12 * max(1.0, abs(best))))]


@dataclass(frozen=True)
class IntervalSummary:
    mean: float
    lo: float
    hi: float
    series: np.ndarray = field(repr=False)


def _interval(series) -> IntervalSummary:
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("empty series")
    lo, hi = np.quantile(series, [0.025, 0.975])
    # a constant series reports its value exactly, free of summation rounding
    mean = float(series[0]) if np.all(series == series[0]) else float(series.mean())
    return IntervalSummary(mean, float(lo), float(hi), series)


def rand_posterior_summary(trace: PosteriorTrace, view_pair=(0, 1)) -> IntervalSummary:
    """Posterior mean and equal-tailed 95% interval of the Rand index between two views."""
    if trace.n_draws == 0:
        raise ValueError("trace has no draws")
    return _interval(trace.rand_series(*view_pair))


def ari_posterior_summary(trace: PosteriorTrace, view_pair=(0, 1)) -> IntervalSummary:
    """Same as :func:`rand_posterior_summary` for the adjusted Rand index.

    Draws where the index is undefined (both views trivial but different)
    are skipped.
    """
    u, v = view_pair
    values = []
    for draw in trace.labels:
        try:
            values.append(adjusted_rand_index(draw[u], draw[v]))
        except ValueError:
            continue
    return _interval(values)


def k_posterior(trace: PosteriorTrace, view: int) -> dict:
    """Posterior probability of each number of occupied clusters in ``view``."""
    if trace.n_draws == 0:
        raise ValueError("trace has no draws")
    values, counts = np.unique(trace.k[:, view], return_counts=True)
    return {int(k): c / trace.n_draws for k, c in zip(values, counts)}


def joint_k_posterior(trace: PosteriorTrace, view_pair=(0, 1)) -> dict:
    if trace.n_draws == 0:
        raise ValueError("trace has no draws")
    u, v = view_pair
    pairs, counts = np.unique(trace.k[:, [u, v]], axis=0, return_counts=True)
    return {(int(a), int(b)): c / trace.n_draws for (a, b), c in zip(pairs, counts)}


def _autocorrelation(x: np.ndarray) -> np.ndarray:
    T = x.size
    y = x - x.mean()
    size = 1 << (2 * T - 1).bit_length()
    f = np.fft.rfft(y, size)
    acov = np.fft.irfft(f * np.conj(f), size)[:T]
    with np.errstate(divide="ignore", invalid="ignore"):
        return acov / acov[0]


def effective_sample_size(series) -> float:
    """ESS from the initial positive sequence estimator.

    Autocorrelations are summed in adjacent pairs until the first pair with
    a non-positive sum. A constant series has ESS equal to its length.
    """
    x = np.asarray(series, dtype=float)
    T = x.size
    if T < 10:
        raise ValueError("need at least 10 values to estimate ESS")
    if np.all(x == x[0]):
        return float(T)
    acf = _autocorrelation(x)
    if not np.all(np.isfinite(acf)):
        # variance rounds to zero: treat as constant
        return float(T)
    tau = -1.0
    for k in range(0, T - 1, 2):
        pair = acf[k] + acf[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    tau = max(tau, 1.0 / T)
    return float(min(T, T / tau))


@dataclass
class PosteriorSummary:
    point_estimates: list
    psm: list
    rand: dict
    k_posterior: list
    joint_k_posterior: dict
    ess: dict


def summarize(trace: PosteriorTrace, seed: int = 0) -> PosteriorSummary:
    V = trace.num_views
    ess = {"rho": effective_sample_size(trace.rho)} if trace.n_draws >= 10 else {}
    if trace.n_draws >= 10:
        for u, v in trace.pairs:
            ess[f"rand_{u + 1}{v + 1}"] = effective_sample_size(trace.rand_series(u, v))
        for v in range(V):
            ess[f"k{v + 1}"] = effective_sample_size(trace.k[:, v])
    return PosteriorSummary(
        point_estimates=[minimize_vi(trace, v, seed=seed) for v in range(V)],
        psm=[posterior_similarity(trace, v) for v in range(V)],
        rand={pair: rand_posterior_summary(trace, pair) for pair in trace.pairs},
        k_posterior=[k_posterior(trace, v) for v in range(V)],
        joint_k_posterior={pair: joint_k_posterior(trace, pair) for pair in trace.pairs},
        ess=ess,
    )
