"""Observation models for each view and their conjugate updates.

Two kernels are supported: an isotropic Gaussian location model and a
slope-only Gaussian regression of one scalar view on another. Each view
shares a single precision across its components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


def _check_prior(prior):
    a, b = (float(p) for p in prior)
    if not (a > 0 and b > 0):
        raise ValueError(f"precision prior must have positive shape and rate, got {prior}")
    return a, b


@dataclass(frozen=True)
class GaussianViewSpec:
    """Isotropic Gaussian location kernel with a N(base_mean, base_sd^2) base."""

    dim: int = 1
    base_mean: float | tuple = 0.0
    base_sd: float = 1.0
    precision_prior: tuple = (1.0, 1.0)

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("view dimension must be >= 1")
        if not self.base_sd > 0:
            raise ValueError("base_sd must be positive")
        _check_prior(self.precision_prior)
        if np.ndim(self.base_mean) and len(self.base_mean) != self.dim:
            raise ValueError("base_mean length does not match dim")

    @property
    def mean_vector(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.base_mean, dtype=float), (self.dim,)).copy()


@dataclass(frozen=True)
class RegressionViewSpec:
    """Scalar response regressed (no intercept) on the scalar ``covariate_view``."""

    covariate_view: int = 0
    base_mean: float = 0.0
    base_sd: float = 1.0
    precision_prior: tuple = (1.0, 1.0)

    def __post_init__(self):
        if not self.base_sd > 0:
            raise ValueError("base_sd must be positive")
        _check_prior(self.precision_prior)

    @property
    def dim(self) -> int:
        return 1


def loglik_gaussian(x, atom, precision: float) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    atom = np.atleast_1d(np.asarray(atom, dtype=float))
    if x.shape != atom.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {atom.shape}")
    d = x.size
    resid = x - atom
    return float(0.5 * d * (math.log(precision) - LOG_2PI) - 0.5 * precision * resid @ resid)


def loglik_regression(x2: float, x1: float, slope: float, precision: float) -> float:
    resid = x2 - x1 * slope
    return 0.5 * (math.log(precision) - LOG_2PI) - 0.5 * precision * resid * resid


def loglik_table_gaussian(X: np.ndarray, atoms: np.ndarray, precision: float) -> np.ndarray:
    """``(n, L)`` table of log densities of every row under every atom."""
    d = X.shape[1]
    sq = ((X[:, None, :] - atoms[None, :, :]) ** 2).sum(axis=2)
    return 0.5 * d * (math.log(precision) - LOG_2PI) - 0.5 * precision * sq


def loglik_table_regression(y: np.ndarray, x: np.ndarray, slopes: np.ndarray,
                            precision: float) -> np.ndarray:
    resid = y[:, None] - x[:, None] * slopes[None, :]
    return 0.5 * (math.log(precision) - LOG_2PI) - 0.5 * precision * resid * resid


def _normal_draw(mean, prec, rng):
    return mean + rng.standard_normal(np.shape(mean)) / np.sqrt(prec)


def update_atom_gaussian(members, spec: GaussianViewSpec, precision: float,
                         rng: np.random.Generator) -> np.ndarray:
    """Conjugate draw of one component mean given its member rows (possibly none)."""
    members = np.asarray(members, dtype=float).reshape(-1, spec.dim)
    prior_prec = 1.0 / spec.base_sd**2
    post_prec = prior_prec + members.shape[0] * precision
    post_mean = (spec.mean_vector * prior_prec + precision * members.sum(axis=0)) / post_prec
    return _normal_draw(post_mean, post_prec, rng)


def update_atom_regression(members, spec: RegressionViewSpec, precision: float,
                           rng: np.random.Generator) -> float:
    """Conjugate draw of one slope given its ``(x1, x2)`` member pairs."""
    members = np.asarray(members, dtype=float).reshape(-1, 2)
    x1, x2 = members[:, 0], members[:, 1]
    prior_prec = 1.0 / spec.base_sd**2
    post_prec = prior_prec + precision * (x1 @ x1)
    post_mean = (spec.base_mean * prior_prec + precision * (x1 @ x2)) / post_prec
    return float(_normal_draw(post_mean, post_prec, rng))


def update_precision(rss: float, count: int, prior, rng: np.random.Generator, dim: int = 1) -> float:
    """Gamma(a + count*dim/2, rate b + rss/2) draw of a view's shared precision."""
    if rss < 0:
        raise ValueError("residual sum of squares must be nonnegative")
    a, b = _check_prior(prior)
    return float(rng.gamma(a + 0.5 * count * dim, 1.0 / (b + 0.5 * rss)))


def update_atoms_gaussian(X: np.ndarray, labels: np.ndarray, n_components: int,
                          spec: GaussianViewSpec, precision: float,
                          rng: np.random.Generator) -> np.ndarray:
    """Draw all ``L`` component means at once; empty components get base draws."""
    sizes = np.bincount(labels, minlength=n_components).astype(float)
    sums = np.zeros((n_components, X.shape[1]))
    np.add.at(sums, labels, X)
    prior_prec = 1.0 / spec.base_sd**2
    post_prec = prior_prec + sizes * precision
    post_mean = (spec.mean_vector[None, :] * prior_prec + precision * sums) / post_prec[:, None]
    return post_mean + rng.standard_normal(post_mean.shape) / np.sqrt(post_prec)[:, None]


def update_atoms_regression(y: np.ndarray, x: np.ndarray, labels: np.ndarray,
                            n_components: int, spec: RegressionViewSpec,
                            precision: float, rng: np.random.Generator) -> np.ndarray:
    sxx = np.bincount(labels, weights=x * x, minlength=n_components)
    sxy = np.bincount(labels, weights=x * y, minlength=n_components)
    prior_prec = 1.0 / spec.base_sd**2
    post_prec = prior_prec + precision * sxx
    post_mean = (spec.base_mean * prior_prec + precision * sxy) / post_prec
    return post_mean + rng.standard_normal(n_components) / np.sqrt(post_prec)


def rss_gaussian(X: np.ndarray, labels: np.ndarray, atoms: np.ndarray) -> float:
    return float(((X - atoms[labels]) ** 2).sum())


def rss_regression(y: np.ndarray, x: np.ndarray, labels: np.ndarray, slopes: np.ndarray) -> float:
    return float(((y - x * slopes[labels]) ** 2).sum())
