"""scikit-learn style wrapper around the Gibbs sampler."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_per_view, check_positive_int, check_views, standardize_views
from .inference import summarize
from .kernels import GaussianViewSpec, RegressionViewSpec
from .sampler import (
    FixedRho,
    GammaRho,
    GridRho,
    MultiviewData,
    PosteriorTrace,
    SamplerConfig,
    run_chain,
)


class CLICMixture(ClusterMixin, BaseEstimator):
    """Dependent clustering of several views of the same objects.

    Each view gets its own partition; the product-centred Dirichlet process
    prior lets the data decide how strongly the partitions agree.

    Parameters
    ----------
    n_components : int or sequence of int
        Components per view in the finite approximation.
    gamma : float or sequence of float
        Concentration of each view's weights.
    rho_scheme : {"gamma", "fixed", "grid"}
        How the dependence parameter is handled: Gamma prior (``rho_prior``),
        fixed at ``rho``, or uniform on ``rho_grid``.
    model : {"uncorrelated", "correlated"}
        ``correlated`` regresses view 2 on the scalar view 1.
    view_dims : sequence of int, optional
        Column widths of each view when ``fit`` receives a single 2-D array.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples, n_views)
        VI point estimate of each view's partition, 1-based.
    trace_ : PosteriorTrace
    summary_ : PosteriorSummary
    """

    def __init__(self, n_components=5, gamma=1.0, rho_scheme="gamma", rho=1.0,
                 rho_prior=(1.0, 1.0), rho_grid=None, label_scheme="conditional",
                 view_order=None, model="uncorrelated", view_dims=None, n_iter=30000,
                 burn_in=10000, thin=2, standardize=False, base_mean=0.0, base_sd=1.0,
                 precision_prior=(1.0, 1.0), random_state=None):
        self.n_components = n_components
        self.gamma = gamma
        self.rho_scheme = rho_scheme
        self.rho = rho
        self.rho_prior = rho_prior
        self.rho_grid = rho_grid
        self.label_scheme = label_scheme
        self.view_order = view_order
        self.model = model
        self.view_dims = view_dims
        self.n_iter = n_iter
        self.burn_in = burn_in
        self.thin = thin
        self.standardize = standardize
        self.base_mean = base_mean
        self.base_sd = base_sd
        self.precision_prior = precision_prior
        self.random_state = random_state

    def _rho(self):
        if self.rho_scheme == "gamma":
            return GammaRho(*self.rho_prior)
        if self.rho_scheme == "fixed":
            return FixedRho(self.rho)
        if self.rho_scheme == "grid":
            return GridRho() if self.rho_grid is None else GridRho(tuple(self.rho_grid))
        raise ValueError(f"rho_scheme must be 'gamma', 'fixed' or 'grid', got {self.rho_scheme!r}")

    def _specs(self, views):
        kw = dict(base_sd=self.base_sd, precision_prior=tuple(self.precision_prior))
        specs = [GaussianViewSpec(dim=X.shape[1], base_mean=self.base_mean, **kw) for X in views]
        if self.model == "correlated":
            if len(views) != 2:
                raise ValueError("the correlated model takes exactly two views")
            specs[1] = RegressionViewSpec(covariate_view=0, base_mean=float(self.base_mean), **kw)
        elif self.model != "uncorrelated":
            raise ValueError(f"model must be 'uncorrelated' or 'correlated', got {self.model!r}")
        return specs

    def _seed(self):
        rs = self.random_state
        if rs is None or isinstance(rs, (int, np.integer)):
            return rs
        if isinstance(rs, np.random.Generator):
            return int(rs.integers(2**63))
        raise ValueError("random_state must be None, an int or a numpy Generator")

    def fit(self, X, y=None):
        views = check_views(X, self.view_dims)
        V = len(views)
        specs = self._specs(views)
        if self.standardize:
            views = standardize_views(views, specs)
        n_iter = check_positive_int(self.n_iter, "n_iter")
        config = SamplerConfig(
            n_components=check_per_view(self.n_components, V, "n_components", int),
            gammas=check_per_view(self.gamma, V, "gamma"),
            rho=self._rho(),
            label_scheme=self.label_scheme,
            view_order=self.view_order,
            iterations=n_iter,
            burn_in=check_positive_int(self.burn_in, "burn_in", 0),
            thin=check_positive_int(self.thin, "thin"),
            seed=self._seed(),
        )
        data = MultiviewData(views, specs)
        self.trace_: PosteriorTrace = run_chain(data, config)
        if self.trace_.n_draws == 0:
            raise ValueError("no draws kept; increase n_iter or reduce burn_in/thin")
        self.summary_ = summarize(self.trace_)
        self.labels_ = np.column_stack(self.summary_.point_estimates)
        self.n_views_ = V
        self.view_dims_ = [X.shape[1] for X in views]
        self.n_features_in_ = int(sum(self.view_dims_))
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    @property
    def rand_posterior_(self):
        check_is_fitted(self, "summary_")
        return self.summary_.rand

    @property
    def k_posterior_(self):
        check_is_fitted(self, "summary_")
        return self.summary_.k_posterior

    def similarity_matrix(self, view: int = 0) -> np.ndarray:
        """Posterior co-clustering probabilities for ``view`` (0-based)."""
        check_is_fitted(self, "summary_")
        return self.summary_.psm[view]
