"""Gibbs sampler for the finite approximation of the product-centred DP.

The state holds component labels per view, the flattened V-way contingency
array of cell counts, the auxiliary per-cell table counts ``r``, the latent
view weight vectors (kept in log space), atoms, shared per-view precisions,
``rho`` and the Escobar-West augmentation variable ``eta``.

One sweep updates, in order: labels, ``r``, view weights, ``rho``, atoms and
precisions.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from . import _fast
from .kernels import (
    GaussianViewSpec,
    RegressionViewSpec,
    loglik_table_gaussian,
    loglik_table_regression,
    rss_gaussian,
    rss_regression,
    update_atoms_gaussian,
    update_atoms_regression,
    update_precision,
)
from .prior import LogStirlingTable, log_dirichlet, stirling_table

DEFAULT_RHO_GRID = tuple(np.round(np.arange(0.01, 150.0 + 1e-9, 0.5), 10))


@dataclass(frozen=True)
class FixedRho:
    value: float = 1.0

    def __post_init__(self):
        if not self.value > 0 or math.isinf(self.value):
            raise ValueError("fixed rho must be a positive real")


@dataclass(frozen=True)
class GammaRho:
    """Gamma(shape, rate) prior on rho, updated by Escobar-West augmentation."""

    shape: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise ValueError("gamma prior on rho needs positive shape and rate")


@dataclass(frozen=True)
class GridRho:
    """Uniform prior over a grid of rho values, updated by griddy Gibbs."""

    points: tuple = DEFAULT_RHO_GRID

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("rho grid must be a nonempty sequence")
        if np.any(pts <= 0) or np.any(np.diff(pts) <= 0):
            raise ValueError("rho grid must be positive and strictly ascending")
        object.__setattr__(self, "points", tuple(float(p) for p in pts))


def parse_rho_scheme(text: str):
    """Parse ``fixed:v``, ``gamma:a,b`` or ``grid:lo:hi:step``."""
    kind, _, rest = text.strip().partition(":")
    try:
        if kind == "fixed":
            return FixedRho(float(rest))
        if kind == "gamma":
            a, b = (float(x) for x in rest.split(","))
            return GammaRho(a, b)
        if kind == "grid":
            if not rest:
                return GridRho()
            if "," in rest or ":" not in rest:
                return GridRho(tuple(float(x) for x in rest.split(",")))
            lo, hi, step = (float(x) for x in rest.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError("grid needs lo <= hi and a positive step")
            return GridRho(tuple(np.arange(lo, hi + 1e-9 * step, step)))
    except ValueError as err:
        raise ValueError(f"bad rho scheme {text!r}: {err}") from None
    raise ValueError(f"bad rho scheme {text!r}; expected fixed:v, gamma:a,b or grid:lo:hi:step")


def rho_scheme_to_str(scheme) -> str:
    if isinstance(scheme, FixedRho):
        return f"fixed:{scheme.value!r}"
    if isinstance(scheme, GammaRho):
        return f"gamma:{scheme.shape!r},{scheme.rate!r}"
    pts = np.asarray(scheme.points)
    steps = np.diff(pts)
    if pts.size > 2 and np.allclose(steps, steps[0]):
        return f"grid:{float(pts[0])!r}:{float(pts[-1])!r}:{float(steps[0])!r}"
    return "grid:" + ",".join(repr(float(p)) for p in pts)


@dataclass(frozen=True)
class SamplerConfig:
    n_components: tuple = (5, 5)
    gammas: tuple | None = None
    rho: FixedRho | GammaRho | GridRho = field(default_factory=GammaRho)
    label_scheme: str = "conditional"
    view_order: tuple | None = None
    iterations: int = 30000
    burn_in: int = 10000
    thin: int = 2
    seed: int | None = None
    flat_likelihood: bool = False
    store_atoms: bool = False

    def __post_init__(self):
        comps = tuple(int(L) for L in self.n_components)
        if len(comps) < 2 or min(comps) < 1:
            raise ValueError("need at least two views, each with >= 1 component")
        object.__setattr__(self, "n_components", comps)
        V = len(comps)
        gammas = (1.0,) * V if self.gammas is None else tuple(float(g) for g in self.gammas)
        if len(gammas) != V or min(gammas) <= 0:
            raise ValueError("need one positive gamma per view")
        object.__setattr__(self, "gammas", gammas)
        order = tuple(range(V)) if self.view_order is None else tuple(int(v) for v in self.view_order)
        if sorted(order) != list(range(V)):
            raise ValueError(f"view_order must be a permutation of 0..{V - 1}")
        object.__setattr__(self, "view_order", order)
        if self.label_scheme not in ("joint", "conditional"):
            raise ValueError("label_scheme must be 'joint' or 'conditional'")
        if not isinstance(self.rho, (FixedRho, GammaRho, GridRho)):
            raise TypeError("rho must be FixedRho, GammaRho or GridRho")
        if self.thin < 1 or self.burn_in < 0 or self.burn_in >= self.iterations:
            raise ValueError("need thin >= 1 and 0 <= burn_in < iterations")

    @property
    def num_views(self) -> int:
        return len(self.n_components)

    @property
    def n_kept(self) -> int:
        return (self.iterations - self.burn_in) // self.thin

    def to_dict(self) -> dict:
        out = asdict(self)
        out["rho"] = rho_scheme_to_str(self.rho)
        return out


@dataclass
class MultiviewData:
    """Observations for each view, as ``(n, d_v)`` float arrays, plus kernels."""

    views: list
    specs: list

    def __post_init__(self):
        self.views = [np.ascontiguousarray(np.asarray(X, dtype=float).reshape(len(X), -1))
                      for X in self.views]
        if len(self.views) < 2 or len(self.specs) != len(self.views):
            raise ValueError("need at least two views and one spec per view")
        n = self.views[0].shape[0]
        if n < 1:
            raise ValueError("data must contain at least one object")
        for v, (X, spec) in enumerate(zip(self.views, self.specs)):
            if X.shape[0] != n:
                raise ValueError(f"view {v + 1} has {X.shape[0]} rows, expected {n}")
            if X.shape[1] != spec.dim:
                raise ValueError(f"view {v + 1} has {X.shape[1]} columns, spec says {spec.dim}")
            if not np.all(np.isfinite(X)):
                raise ValueError(f"view {v + 1} contains missing or non-finite values")
            if isinstance(spec, RegressionViewSpec):
                u = spec.covariate_view
                if not 0 <= u < len(self.views) or u == v:
                    raise ValueError(f"view {v + 1}: invalid covariate view {u + 1}")
                if not isinstance(self.specs[u], GaussianViewSpec) or self.specs[u].dim != 1:
                    raise ValueError("a regression covariate must be a one-dimensional Gaussian view")

    @classmethod
    def gaussian(cls, views, **spec_kwargs) -> "MultiviewData":
        views = [np.asarray(X, dtype=float).reshape(len(X), -1) for X in views]
        return cls(views, [GaussianViewSpec(dim=X.shape[1], **spec_kwargs) for X in views])

    @property
    def n(self) -> int:
        return self.views[0].shape[0]

    @property
    def num_views(self) -> int:
        return len(self.views)


@lru_cache(maxsize=32)
def cell_geometry(n_components: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell component indices ``(M, V)`` and C-order strides ``(V,)``."""
    cellidx = np.indices(n_components).reshape(len(n_components), -1).T.copy()
    strides = np.array([int(np.prod(n_components[v + 1:])) for v in range(len(n_components))],
                       dtype=np.int64)
    cellidx = cellidx.astype(np.int64)
    cellidx.setflags(write=False)
    strides.setflags(write=False)
    return cellidx, strides


@dataclass
class ChainState:
    labels: np.ndarray
    counts: np.ndarray
    r: np.ndarray
    log_q: list
    atoms: list
    precisions: np.ndarray
    rho: float
    eta: float
    n_components: tuple
    gammas: tuple

    @property
    def n(self) -> int:
        return self.labels.shape[1]

    @property
    def counts_array(self) -> np.ndarray:
        return self.counts.reshape(self.n_components)

    @property
    def q(self) -> list:
        return [np.exp(lq) for lq in self.log_q]

    def r_margins(self) -> list:
        arr = self.r.reshape(self.n_components)
        V = len(self.n_components)
        return [arr.sum(axis=tuple(u for u in range(V) if u != v)) for v in range(V)]

    def log_base(self) -> np.ndarray:
        """Flattened ``log(rho * prod_v q_v[k_v])`` over cells."""
        total = math.log(self.rho)
        for v, lq in enumerate(self.log_q):
            shape = [1] * len(self.n_components)
            shape[v] = -1
            total = total + lq.reshape(shape)
        return np.broadcast_to(total, self.n_components).ravel()

    def copy(self) -> "ChainState":
        return ChainState(
            self.labels.copy(), self.counts.copy(), self.r.copy(),
            [x.copy() for x in self.log_q], [x.copy() for x in self.atoms],
            self.precisions.copy(), self.rho, self.eta, self.n_components, self.gammas,
        )

    def check(self) -> None:
        """Raise ``AssertionError`` if cached quantities disagree with the labels."""
        fresh = np.zeros(self.n_components, dtype=np.int64)
        np.add.at(fresh, tuple(self.labels), 1)
        assert np.array_equal(fresh.ravel(), self.counts), "cell counts out of sync"
        assert np.all((self.r >= 0) & (self.r <= self.counts)), "r outside [0, n]"
        for lq in self.log_q:
            assert abs(np.exp(lq).sum() - 1.0) < 1e-12, "view weights do not sum to 1"


def _counts_from_labels(labels, n_components) -> np.ndarray:
    counts = np.zeros(n_components, dtype=np.int64)
    np.add.at(counts, tuple(labels), 1)
    return counts.ravel()


def _base_atoms(spec, L, rng):
    if isinstance(spec, RegressionViewSpec):
        return spec.base_mean + spec.base_sd * rng.standard_normal(L)
    return spec.mean_vector[None, :] + spec.base_sd * rng.standard_normal((L, spec.dim))


def init_state(data: MultiviewData | None, config: SamplerConfig,
               rng: np.random.Generator, n: int | None = None) -> ChainState:
    """Random starting state: uniform labels and weights, prior atoms."""
    if data is not None:
        if data.num_views != config.num_views:
            raise ValueError(f"data has {data.num_views} views, config has {config.num_views}")
        n = data.n
    if n is None or n < 1:
        raise ValueError("need at least one object")
    L = config.n_components
    V = config.num_views
    labels = np.stack([rng.integers(0, L[v], n) for v in range(V)]).astype(np.int64)
    counts = _counts_from_labels(labels, L)
    if data is None:
        atoms = [np.zeros((L[v], 1)) for v in range(V)]
        precisions = np.ones(V)
    else:
        atoms = [_base_atoms(spec, L[v], rng) for v, spec in enumerate(data.specs)]
        precisions = np.array([
            rng.gamma(spec.precision_prior[0], 1.0 / spec.precision_prior[1]) for spec in data.specs
        ])
    scheme = config.rho
    if isinstance(scheme, FixedRho):
        rho = scheme.value
    elif isinstance(scheme, GammaRho):
        rho = scheme.shape / scheme.rate
    else:
        rho = scheme.points[len(scheme.points) // 2]
    return ChainState(
        labels=labels,
        counts=counts,
        r=np.minimum(counts, 1),
        log_q=[np.full(L[v], -math.log(L[v])) for v in range(V)],
        atoms=atoms,
        precisions=precisions,
        rho=float(rho),
        eta=0.5,
        n_components=L,
        gammas=config.gammas,
    )


def loglik_tables(state: ChainState, data: MultiviewData | None) -> np.ndarray:
    """``(V, n, max L)`` log-likelihood of every object under every atom.

    Columns past a view's component count are ``-inf``; a missing ``data``
    gives a flat (all-zero) likelihood.
    """
    L = state.n_components
    V, n = state.labels.shape
    out = np.full((V, n, max(L)), -np.inf)
    if data is None:
        for v in range(V):
            out[v, :, : L[v]] = 0.0
        return out
    for v, spec in enumerate(data.specs):
        if isinstance(spec, RegressionViewSpec):
            x = data.views[spec.covariate_view][:, 0]
            out[v, :, : L[v]] = loglik_table_regression(
                data.views[v][:, 0], x, state.atoms[v], state.precisions[v])
        else:
            out[v, :, : L[v]] = loglik_table_gaussian(
                data.views[v], state.atoms[v], state.precisions[v])
    return out


def update_labels(state: ChainState, data: MultiviewData | None, rng: np.random.Generator,
                  scheme: str = "conditional", order=None) -> ChainState:
    """One scan over objects; each object's cell is redrawn from its full conditional.

    ``joint`` samples the cell in one categorical draw; ``conditional``
    samples one view at a time in ``order`` from the exact marginal of the
    same full conditional, then the remaining views given the earlier ones.
    """
    L = state.n_components
    cellidx, strides = cell_geometry(L)
    order = np.arange(len(L)) if order is None else np.asarray(order, dtype=np.int64)
    LL = loglik_tables(state, data)
    base = np.exp(state.log_base())
    uniforms = rng.random((state.n, len(L)))
    _fast.label_sweep(state.labels, state.counts, cellidx, strides, np.asarray(L),
                      LL, base, uniforms, scheme == "joint", order)
    return state


def update_labels_joint(state, data, rng):
    return update_labels(state, data, rng, "joint")


def update_labels_conditional(state, data, rng, order=None):
    return update_labels(state, data, rng, "conditional", order)


def label_cell_probabilities(state: ChainState, data: MultiviewData | None, i: int,
                             scheme: str = "joint", order=None) -> np.ndarray:
    """Probability of each cell for object ``i`` under one label update.

    Returned with shape ``n_components``; used to compare the two schemes.
    """
    L = state.n_components
    cellidx, strides = cell_geometry(L)
    counts = state.counts.copy()
    counts[int(state.labels[:, i] @ strides)] -= 1
    logw = np.empty(counts.size)
    mx = _fast.cell_log_weights(i, counts, cellidx, loglik_tables(state, data),
                                np.exp(state.log_base()), logw)
    w = np.exp(logw - mx)
    if scheme == "joint":
        probs = w / w.sum()
    else:
        order = np.arange(len(L)) if order is None else np.asarray(order, dtype=np.int64)
        probs = _fast.sequential_cell_probs(w, cellidx, np.asarray(L), order)
    return probs.reshape(L)


def update_aux_r(state: ChainState, table: LogStirlingTable, rng: np.random.Generator) -> ChainState:
    """Redraw ``r[cell] = w`` with probability proportional to
    ``|s(n_cell, w)| (rho prod q)^w``; empty cells get 0."""
    if table.n_max < state.n:
        raise ValueError("Stirling table too small for this sample size")
    uniforms = rng.random(state.counts.size)
    _fast.aux_r_update(state.counts, state.r, np.ascontiguousarray(state.log_base()),
                       table.values, uniforms)
    return state


def update_q(state: ChainState, rng: np.random.Generator) -> ChainState:
    for v, rv in enumerate(state.r_margins()):
        L = state.n_components[v]
        state.log_q[v] = log_dirichlet(state.gammas[v] / L + rv, rng)
    return state


def update_rho_escobar_west(state: ChainState, prior: GammaRho, rng: np.random.Generator) -> ChainState:
    r = int(state.r.sum())
    if r < 1:
        raise ValueError("rho update needs at least one auxiliary table (r >= 1)")
    n = state.n
    state.eta = float(rng.beta(state.rho + 1.0, n))
    rate = prior.rate - math.log(state.eta)
    odds = (prior.shape + r - 1.0) / (n * rate)
    shape = prior.shape + r if rng.random() * (1.0 + odds) < odds else prior.shape + r - 1.0
    state.rho = float(rng.gamma(shape, 1.0 / rate))
    return state


def rho_grid_log_posterior(state: ChainState, grid) -> np.ndarray:
    """Unnormalized log posterior of rho on ``grid`` given labels and view weights."""
    u = np.asarray(grid, dtype=float)[:, None]
    occupied = state.counts > 0
    nc = state.counts[occupied][None, :]
    qprod = np.exp(state.log_base()[occupied] - math.log(state.rho))[None, :]
    with np.errstate(divide="ignore"):
        cells = gammaln(nc + u * qprod) - gammaln(u * qprod)
    return (gammaln(u) - gammaln(state.n + u)).ravel() + cells.sum(axis=1)


def update_rho_griddy(state: ChainState, grid, rng: np.random.Generator) -> ChainState:
    grid = np.asarray(grid, dtype=float)
    lp = rho_grid_log_posterior(state, grid)
    w = np.exp(lp - lp.max())
    cum = np.cumsum(w)
    k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    state.rho = float(grid[min(k, grid.size - 1)])
    return state


def update_atoms(state: ChainState, data: MultiviewData, rng: np.random.Generator) -> ChainState:
    for v, spec in enumerate(data.specs):
        L = state.n_components[v]
        if isinstance(spec, RegressionViewSpec):
            x = data.views[spec.covariate_view][:, 0]
            state.atoms[v] = update_atoms_regression(
                data.views[v][:, 0], x, state.labels[v], L, spec, state.precisions[v], rng)
        else:
            state.atoms[v] = update_atoms_gaussian(
                data.views[v], state.labels[v], L, spec, state.precisions[v], rng)
    return state


def update_precisions(state: ChainState, data: MultiviewData, rng: np.random.Generator) -> ChainState:
    for v, spec in enumerate(data.specs):
        if isinstance(spec, RegressionViewSpec):
            x = data.views[spec.covariate_view][:, 0]
            rss = rss_regression(data.views[v][:, 0], x, state.labels[v], state.atoms[v])
        else:
            rss = rss_gaussian(data.views[v], state.labels[v], state.atoms[v])
        state.precisions[v] = update_precision(rss, state.n, spec.precision_prior, rng, spec.dim)
    return state


def sweep(state: ChainState, data: MultiviewData | None, config: SamplerConfig,
          table: LogStirlingTable, rng: np.random.Generator) -> ChainState:
    likelihood = None if config.flat_likelihood else data
    update_labels(state, likelihood, rng, config.label_scheme, config.view_order)
    update_aux_r(state, table, rng)
    update_q(state, rng)
    if isinstance(config.rho, GammaRho):
        update_rho_escobar_west(state, config.rho, rng)
    elif isinstance(config.rho, GridRho):
        update_rho_griddy(state, config.rho.points, rng)
    if likelihood is not None:
        update_atoms(state, likelihood, rng)
        update_precisions(state, likelihood, rng)
    return state


def _pair_rand(counts: np.ndarray, n_components: tuple, pairs: list, n: int) -> np.ndarray:
    arr = counts.reshape(n_components)
    V = len(n_components)
    out = np.empty(len(pairs))
    total = n * (n - 1) / 2.0
    for j, (u, v) in enumerate(pairs):
        tab = arr.sum(axis=tuple(w for w in range(V) if w not in (u, v))).astype(float)
        both = (tab * (tab - 1)).sum() / 2.0
        rows = tab.sum(axis=1)
        cols = tab.sum(axis=0)
        same = ((rows * (rows - 1)).sum() + (cols * (cols - 1)).sum()) / 2.0
        out[j] = 1.0 - (same - 2.0 * both) / total if n > 1 else 1.0
    return out


@dataclass
class PosteriorTrace:
    """Kept draws of a chain: 1-based component labels ``(T, V, n)``, rho,
    Rand index per view pair, and cluster counts per view."""

    labels: np.ndarray
    rho: np.ndarray
    rand: np.ndarray
    k: np.ndarray
    iterations: np.ndarray
    pairs: list
    atoms: list | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        return self.labels.shape[0]

    @property
    def num_views(self) -> int:
        return self.labels.shape[1]

    @property
    def n(self) -> int:
        return self.labels.shape[2]

    def rand_series(self, u: int = 0, v: int = 1) -> np.ndarray:
        return self.rand[:, self.pairs.index((min(u, v), max(u, v)))]

    @classmethod
    def concatenate(cls, traces: list) -> "PosteriorTrace":
        if not traces:
            raise ValueError("nothing to concatenate")
        first = traces[0]
        return cls(
            labels=np.concatenate([t.labels for t in traces]),
            rho=np.concatenate([t.rho for t in traces]),
            rand=np.concatenate([t.rand for t in traces]),
            k=np.concatenate([t.k for t in traces]),
            iterations=np.concatenate([t.iterations for t in traces]),
            pairs=list(first.pairs),
            atoms=None,
            metadata={"chains": [t.metadata for t in traces]},
        )


def run_chain(data: MultiviewData | None, config: SamplerConfig,
              rng: np.random.Generator | None = None, n: int | None = None,
              initial_state: ChainState | None = None) -> PosteriorTrace:
    """Run one chain and return its thinned post-burn-in draws.

    With ``config.flat_likelihood`` the data may be ``None`` (pass ``n``),
    which samples the prior through the same Gibbs updates.
    """
    if data is None and not config.flat_likelihood:
        raise ValueError("data is required unless flat_likelihood is set")
    rng = np.random.default_rng(config.seed) if rng is None else rng
    state = initial_state.copy() if initial_state is not None else init_state(data, config, rng, n)
    n = state.n
    table = stirling_table(n)
    V = config.num_views
    pairs = list(itertools.combinations(range(V), 2))
    T = config.n_kept
    dtype = np.int16 if max(config.n_components) < 2**15 else np.int64
    labels = np.empty((T, V, n), dtype=dtype)
    rho = np.empty(T)
    rand = np.empty((T, len(pairs)))
    k = np.empty((T, V), dtype=np.int64)
    iters = np.empty(T, dtype=np.int64)
    atoms = [] if config.store_atoms else None

    start = time.perf_counter()
    j = 0
    for t in range(1, config.iterations + 1):
        sweep(state, data, config, table, rng)
        if t > config.burn_in and (t - config.burn_in) % config.thin == 0 and j < T:
            labels[j] = state.labels + 1
            rho[j] = state.rho
            rand[j] = _pair_rand(state.counts, state.n_components, pairs, n)
            arr = state.counts_array
            for v in range(V):
                k[j, v] = np.count_nonzero(
                    arr.sum(axis=tuple(w for w in range(V) if w != v)))
            iters[j] = t
            if atoms is not None:
                atoms.append([a.copy() for a in state.atoms] + [state.precisions.copy()])
            j += 1
    elapsed = time.perf_counter() - start
    return PosteriorTrace(
        labels=labels, rho=rho, rand=rand, k=k, iterations=iters, pairs=pairs, atoms=atoms,
        metadata={"config": config.to_dict(), "seed": config.seed, "wall_clock_seconds": elapsed},
    )
