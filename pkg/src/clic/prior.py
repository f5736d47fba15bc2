"""Exact prior layer: log-space combinatorics, partition PMFs, dependence
measures and forward samplers for the product-centred Dirichlet process.

Everything is computed in log space; Stirling numbers of the first kind and
rising factorials overflow doubles for n around 20.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .partitions import canonicalize, contingency

MAX_MEPPF_TERMS = 10**7
_CHUNK = 1 << 16


class LogStirlingTable:
    """Triangular table of ``log|s(n, m)|`` for ``0 <= m <= n <= n_max``.

    Built once with the recursion ``|s(n+1, m)| = n|s(n, m)| + |s(n, m-1)|``
    carried out with log-sum-exp. Entries that are zero hold ``-inf``.
    """

    def __init__(self, n_max: int):
        if n_max < 0:
            raise ValueError("n_max must be nonnegative")
        values = np.full((n_max + 1, n_max + 1), -np.inf)
        values[0, 0] = 0.0
        for n in range(n_max):
            prev = values[n, : n + 2]
            scaled = prev[1:] + math.log(n) if n > 0 else np.full(n + 1, -np.inf)
            values[n + 1, 1 : n + 2] = np.logaddexp(scaled, prev[:-1])
        values.setflags(write=False)
        self.n_max = n_max
        self.values = values

    def __call__(self, n: int, m: int) -> float:
        if not (0 <= n <= self.n_max and 0 <= m <= self.n_max):
            raise IndexError(f"({n}, {m}) outside Stirling table of size {self.n_max}")
        return float(self.values[n, m])

    def row(self, n: int) -> np.ndarray:
        """``log|s(n, m)|`` for ``m = 0..n``."""
        if not 0 <= n <= self.n_max:
            raise IndexError(f"n={n} outside Stirling table of size {self.n_max}")
        return self.values[n, : n + 1]


_TABLES: dict[int, LogStirlingTable] = {}


def stirling_table(n_max: int) -> LogStirlingTable:
    """Shared read-only table covering at least ``n_max``."""
    size = max(64, 1 << max(0, n_max - 1).bit_length())
    if size not in _TABLES:
        _TABLES[size] = LogStirlingTable(size)
    return _TABLES[size]


def log_stirling(table: LogStirlingTable, n: int, m: int) -> float:
    """``log|s(n, m)|`` looked up in ``table``."""
    return table(n, m)


def _positive(name, value, allow_inf=False):
    value = float(value)
    if not value > 0 or (math.isinf(value) and not allow_inf) or math.isnan(value):
        raise ValueError(f"{name} must be a positive real, got {value}")
    return value


@dataclass(frozen=True)
class ClicHyperParams:
    """Dependence concentration ``rho`` and per-view concentrations ``gammas``.

    ``math.inf`` is accepted for the closed-form limit evaluations only.
    """

    rho: float = 1.0
    gammas: tuple = (1.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "rho", _positive("rho", self.rho, allow_inf=True))
        gammas = tuple(_positive("gamma", g, allow_inf=True) for g in self.gammas)
        if len(gammas) < 2:
            raise ValueError("at least two views are required")
        object.__setattr__(self, "gammas", gammas)

    @property
    def num_views(self) -> int:
        return len(self.gammas)


@dataclass(frozen=True)
class FiniteApproxParams:
    """Finite approximation with ``n_components[v]`` atoms in view ``v``."""

    n_components: tuple = (5, 5)
    hp: ClicHyperParams = field(default_factory=ClicHyperParams)

    def __post_init__(self):
        comps = tuple(int(L) for L in self.n_components)
        if any(L < 1 for L in comps):
            raise ValueError("component counts must be >= 1")
        if len(comps) != self.hp.num_views:
            raise ValueError("need one component count per view")
        object.__setattr__(self, "n_components", comps)


def log_rising_factorial(x, n):
    """``log Gamma(x + n) - log Gamma(x)``; exactly 0 when ``n == 0``."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)):
        raise ValueError("rising factorial base must be positive")
    n = np.asarray(n)
    out = np.where(n == 0, 0.0, gammaln(x + n) - gammaln(x))
    return float(out) if out.ndim == 0 else out


def crp_log_pmf(c, gamma: float) -> float:
    """Log Chinese restaurant process probability of partition ``c``."""
    gamma = _positive("gamma", gamma)
    labels = canonicalize(c)
    sizes = np.bincount(labels)[1:]
    return float(
        sizes.size * math.log(gamma)
        + gammaln(sizes).sum()
        - log_rising_factorial(gamma, labels.size)
    )


def _check_finite_hp(hp: ClicHyperParams):
    if math.isinf(hp.rho) or any(math.isinf(g) for g in hp.gammas):
        raise ValueError("exact PMFs need finite hyperparameters")


def clic_log_meppf(c1, c2, hp: ClicHyperParams, table: LogStirlingTable | None = None,
                   max_terms: int = MAX_MEPPF_TERMS) -> float:
    """Exact log joint probability of two view partitions.

    Sums over every auxiliary matrix ``r`` with ``1 <= r[k1, k2] <= n[k1, k2]``
    on the occupied cells of the contingency table. The sum has
    ``prod(n[k1, k2])`` terms; beyond ``max_terms`` a ``ValueError`` is raised
    and Monte Carlo should be used instead.
    """
    _check_finite_hp(hp)
    rho, g1, g2 = hp.rho, hp.gammas[0], hp.gammas[1]
    counts = contingency(c1, c2).counts
    n = int(counts.sum())
    table = table or stirling_table(n)
    rows, cols = np.nonzero(counts)
    cell_n = counts[rows, cols]
    total = int(np.prod(cell_n.astype(object)))
    if total > max_terms:
        raise ValueError(
            f"exact evaluation needs {total} terms (> {max_terms}); use Monte Carlo instead"
        )
    k1, k2 = counts.shape
    row_ind = np.zeros((cell_n.size, k1))
    row_ind[np.arange(cell_n.size), rows] = 1.0
    col_ind = np.zeros((cell_n.size, k2))
    col_ind[np.arange(cell_n.size), cols] = 1.0
    radix = np.cumprod(np.concatenate([[1], cell_n[:-1]]))
    log_rho = math.log(rho)
    const = k1 * math.log(g1) + k2 * math.log(g2)

    acc = -np.inf
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK))
        r = (idx[:, None] // radix[None, :]) % cell_n[None, :] + 1
        r_tot = r.sum(axis=1)
        r1 = r @ row_ind
        r2 = r @ col_ind
        terms = (
            r_tot * log_rho
            + gammaln(r1).sum(axis=1)
            + gammaln(r2).sum(axis=1)
            - log_rising_factorial(g1, r_tot)
            - log_rising_factorial(g2, r_tot)
            + table.values[cell_n[None, :], r].sum(axis=1)
        )
        acc = np.logaddexp(acc, logsumexp(terms))
    return float(const + acc - log_rising_factorial(rho, n))


def _log_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.full(a.size + b.size - 1, -np.inf)
    for i, ai in enumerate(a):
        if np.isfinite(ai):
            out[i : i + b.size] = np.logaddexp(out[i : i + b.size], ai + b)
    return out


def marginal_log_eppf(c, rho: float, gamma: float,
                      table: LogStirlingTable | None = None) -> float:
    """Exact log marginal probability of one view's partition.

    The nested sum over per-cluster auxiliary counts only couples through
    their total, so it is evaluated as a log-space convolution.
    """
    rho = _positive("rho", rho)
    gamma = _positive("gamma", gamma)
    labels = canonicalize(c)
    sizes = np.bincount(labels)[1:]
    n = labels.size
    table = table or stirling_table(n)
    # poly[r] = log sum over r-vectors with total r of prod (r_k - 1)! |s(n_k, r_k)|
    poly = np.array([0.0])
    for size in sizes:
        w = np.arange(size + 1)
        coef = np.full(size + 1, -np.inf)
        coef[1:] = gammaln(w[1:]) + table.values[size, 1 : size + 1]
        poly = _log_convolve(poly, coef)
    r = np.arange(poly.size)
    keep = np.isfinite(poly)
    terms = poly[keep] + r[keep] * math.log(rho) - log_rising_factorial(gamma, r[keep])
    return float(sizes.size * math.log(gamma) + logsumexp(terms)
                 - log_rising_factorial(rho, n))


def table_count_log_pmf(n: int, rho: float, table: LogStirlingTable | None = None) -> np.ndarray:
    """``log P(W = w)``, ``w = 0..n``, for the number of occupied tables of a
    CRP(rho) with ``n`` customers; ``w = 0`` carries ``-inf`` when ``n >= 1``."""
    table = table or stirling_table(n)
    w = np.arange(n + 1)
    if math.isinf(rho):
        out = np.full(n + 1, -np.inf)
        out[n] = 0.0
        return out
    return table.row(n) + w * math.log(rho) - log_rising_factorial(rho, n)


def antoniak_log_pmf(w: int, gamma: float, table: LogStirlingTable | None = None) -> np.ndarray:
    """``log Pr[K(w; gamma) = m]`` for ``m = 0..w`` (clusters among ``w`` CRP draws)."""
    return table_count_log_pmf(w, gamma, table)


def prior_k_distribution(n: int, rho: float, gamma: float,
                         table: LogStirlingTable | None = None) -> np.ndarray:
    """Prior law of the number of clusters in one view, indexed ``m = 0..n``.

    Mixes the CRP(gamma) cluster-count law over the number of root tables
    ``W``, whose law is ``|s(n, w)| rho^w / (rho)^(n)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rho = _positive("rho", rho, allow_inf=True)
    gamma = _positive("gamma", gamma, allow_inf=True)
    table = table or stirling_table(n)
    log_w = table_count_log_pmf(n, rho, table)
    out = np.zeros(n + 1)
    for w in range(1, n + 1):
        if np.isfinite(log_w[w]):
            out[: w + 1] += np.exp(log_w[w] + antoniak_log_pmf(w, gamma, table))
    return out


def prior_k_pmf(n: int, m: int, rho: float, gamma: float,
                table: LogStirlingTable | None = None) -> float:
    if not 1 <= m <= n:
        return 0.0
    return float(prior_k_distribution(n, rho, gamma, table)[m])


def _together(gamma: float) -> float:
    # P(two CRP(gamma) draws share a cluster) = 1/(gamma + 1)
    return 0.0 if math.isinf(gamma) else 1.0 / (gamma + 1.0)


def expected_rand_infinite(hp: ClicHyperParams, views=(0, 1)) -> float:
    """Prior expected Rand index between two views.

    ``nu + (1 - nu) * tau0`` with ``nu = 1/(rho + 1)`` and ``tau0`` the
    expected Rand index of independent CRP partitions. Infinite ``rho`` or
    ``gamma`` evaluate the corresponding limits.
    """
    u, v = views
    nu = 0.0 if math.isinf(hp.rho) else 1.0 / (hp.rho + 1.0)
    a1, a2 = _together(hp.gammas[u]), _together(hp.gammas[v])
    tau0 = a1 * a2 + (1.0 - a1) * (1.0 - a2)
    return nu + (1.0 - nu) * tau0


def independent_finite_rand(fp: FiniteApproxParams, views=(0, 1)) -> float:
    """Expected Rand index of independent symmetric Dirichlet-multinomial partitions."""
    parts = []
    for v in views:
        L, g = fp.n_components[v], fp.hp.gammas[v]
        together = (1.0 - 1.0 / L) * _together(g) + 1.0 / L
        parts.append(together)
    t1, t2 = parts
    return t1 * t2 + (1.0 - t1) * (1.0 - t2)


def expected_rand_finite(fp: FiniteApproxParams, views=(0, 1)) -> float:
    nu = 0.0 if math.isinf(fp.hp.rho) else 1.0 / (fp.hp.rho + 1.0)
    return nu + (1.0 - nu) * independent_finite_rand(fp, views)


def sample_urn_batch(n: int, hp: ClicHyperParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` independent label sets from the independence-centred urn.

    Returns an int array of shape ``(size, V, n)`` holding canonical 1-based
    labels. Customer ``i`` copies the (table, entree, ...) combination of a
    uniformly chosen earlier customer with probability ``(i-1)/(rho+i-1)``;
    otherwise every view picks an existing atom with weight ``r_vk`` or a new
    one with weight ``gamma_v``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_finite_hp(hp)
    V = hp.num_views
    gammas = np.asarray(hp.gammas)
    labels = np.zeros((size, V, n), dtype=np.int64)
    # labels picked at each independent choice; label k appears r_vk times
    indep = np.zeros((size, V, n), dtype=np.int64)
    labels[:, :, 0] = 1
    indep[:, :, 0] = 1
    r = np.ones(size, dtype=np.int64)
    K = np.ones((size, V), dtype=np.int64)
    rows = np.arange(size)
    for i in range(1, n):
        copy = rng.random(size) * (hp.rho + i) < i
        j = rng.integers(0, i, size)
        idx = np.nonzero(copy)[0]
        labels[idx, :, i] = labels[idx, :, j[idx]]
        fresh = ~copy
        for v in range(V):
            new = rng.random(size) * (gammas[v] + r) < gammas[v]
            pick = np.minimum((rng.random(size) * r).astype(np.int64), r - 1)
            lab = np.where(new, K[:, v] + 1, indep[rows, v, pick])
            K[:, v] += new & fresh
            labels[fresh, v, i] = lab[fresh]
            indep[fresh, v, r[fresh]] = lab[fresh]
        r += fresh
    return labels


def sample_urn(n: int, hp: ClicHyperParams, rng: np.random.Generator) -> tuple:
    draw = sample_urn_batch(n, hp, 1, rng)[0]
    return tuple(draw[v] for v in range(hp.num_views))


def log_dirichlet(alpha, rng: np.random.Generator, size=None) -> np.ndarray:
    """Log of a Dirichlet draw, stable for tiny (or underflowed) concentrations.

    Uses ``log G(a) = log G(a + 1) + log(U) / a`` for the gamma variates.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    shape = alpha.shape if size is None else (size,) + alpha.shape[-1:]
    alpha = np.broadcast_to(alpha, shape)
    g = np.log(rng.standard_gamma(alpha + 1.0))
    e = rng.standard_exponential(shape)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_g = g - e / alpha
    log_g = np.where(alpha > 0, log_g, -np.inf)
    # plain numpy normalizer: this sits in the sampler's per-sweep path
    top = log_g.max(axis=-1, keepdims=True)
    return log_g - (top + np.log(np.exp(log_g - top).sum(axis=-1, keepdims=True)))


def sample_finite_prior(n: int, fp: FiniteApproxParams, rng: np.random.Generator) -> tuple:
    """One draw of the view partitions under the finite approximation.

    Draws the latent view weights, the full product-centred cell weight
    array, then ``n`` cells independently. Labels are canonicalized.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_finite_hp(fp.hp)
    log_q = [log_dirichlet(np.full(L, g / L), rng)
             for L, g in zip(fp.n_components, fp.hp.gammas)]
    log_alpha = math.log(fp.hp.rho) + sum(np.ix_(*log_q))
    cum = np.cumsum(np.exp(log_dirichlet(np.exp(log_alpha.ravel()), rng)))
    cells = np.minimum(np.searchsorted(cum, rng.random(n) * cum[-1], side="right"), cum.size - 1)
    idx = np.unravel_index(cells, fp.n_components)
    return tuple(canonicalize(k) for k in idx)


def _categorical_rows(prob: np.ndarray, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum(prob, axis=1)
    k = (cum < u[:, None] * cum[:, -1:]).sum(axis=1)
    return np.minimum(k, prob.shape[1] - 1)


def sample_finite_prior_batch(n: int, fp: FiniteApproxParams, size: int,
                              rng: np.random.Generator, rho=None) -> np.ndarray:
    """Vectorized finite-prior draws, shape ``(size, V, n)``, component labels 1..L_v.

    The view weights are drawn explicitly; the cell weight array is integrated
    out, which turns the ``n`` cell draws into a Polya urn over cells whose
    base measure is the product of the view weights. ``rho`` may be an array
    of per-draw values (e.g. draws from a hyperprior).
    """
    V = fp.hp.num_views
    rho = np.broadcast_to(np.asarray(fp.hp.rho if rho is None else rho, dtype=float), (size,))
    q = [np.exp(log_dirichlet(np.full(L, g / L), rng, size=size))
         for L, g in zip(fp.n_components, fp.hp.gammas)]
    labels = np.zeros((size, V, n), dtype=np.int64)
    for i in range(n):
        copy = rng.random(size) * (rho + i) < i
        j = rng.integers(0, max(i, 1), size)
        for v in range(V):
            fresh = _categorical_rows(q[v], rng.random(size)) + 1
            labels[:, v, i] = np.where(copy, labels[np.arange(size), v, j], fresh)
    return labels


def enumerate_meppf(n: int, hp: ClicHyperParams):
    """Yield ``(c1, c2, log_prob)`` over every pair of partitions of ``n`` objects."""
    from .partitions import enumerate_partitions

    parts = enumerate_partitions(n)
    table = stirling_table(n)
    for c1, c2 in itertools.product(parts, parts):
        yield c1, c2, clic_log_meppf(c1, c2, hp, table)
