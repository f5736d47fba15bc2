"""Brute-force checks of the prior layer and the sampler.

Reference sides are computed along routes that do not share code with the
implementation they check: Rand indices by looping over object pairs,
Stirling numbers by exact integer polynomial expansion, the joint PMF by
summing over root partitions, and the Gibbs sampler against forward draws.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .partitions import canonicalize, enumerate_partitions
from .prior import (
    ClicHyperParams,
    FiniteApproxParams,
    clic_log_meppf,
    crp_log_pmf,
    expected_rand_finite,
    expected_rand_infinite,
    marginal_log_eppf,
    sample_finite_prior_batch,
    stirling_table,
)
from .sampler import FixedRho, GammaRho, SamplerConfig, run_chain


@dataclass
class OracleReport:
    name: str
    computed: float
    reference: float
    tolerance: float
    passed: bool
    runtime: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: computed={self.computed:.12g} "
                f"reference={self.reference:.12g} tol={self.tolerance:.3g} {self.detail}").rstrip()


def _report(name, computed, reference, tol, start, detail=""):
    ok = bool(abs(computed - reference) <= tol)
    return OracleReport(name, float(computed), float(reference), float(tol), ok,
                        time.perf_counter() - start, detail)


def stirling_by_expansion(n: int) -> list[int]:
    """Exact ``|s(n, w)|``, ``w = 0..n``, as coefficients of ``x (x+1) ... (x+n-1)``."""
    coef = [1]
    for i in range(n):
        # multiply by (x + i)
        nxt = [0] * (len(coef) + 1)
        for w, c in enumerate(coef):
            nxt[w + 1] += c
            nxt[w] += i * c
        coef = nxt
    return coef


def pair_loop_rand(c1, c2) -> float:
    n = len(c1)
    agree = 0
    for i in range(n):
        for j in range(i + 1, n):
            agree += (c1[i] == c1[j]) == (c2[i] == c2[j])
    return agree / (n * (n - 1) / 2)


def _tag(hp: ClicHyperParams) -> str:
    return f"rho={hp.rho:g},gamma=({','.join(f'{g:g}' for g in hp.gammas)})"


def check_meppf_normalization(n: int, hp: ClicHyperParams, tol: float = 1e-10) -> OracleReport:
    start = time.perf_counter()
    if n > 5:
        raise ValueError("enumeration check limited to n <= 5")
    parts = enumerate_partitions(n)
    table = stirling_table(n)
    total = math.fsum(math.exp(clic_log_meppf(a, b, hp, table))
                      for a, b in itertools.product(parts, parts))
    return _report(f"meppf_normalization[n={n},{_tag(hp)}]", total, 1.0, tol, start)


def _independent_crp_rand(parts, g1, g2) -> float:
    return math.fsum(
        pair_loop_rand(a, b) * math.exp(crp_log_pmf(a, g1) + crp_log_pmf(b, g2))
        for a, b in itertools.product(parts, parts)
    )


def check_eri_exact(n: int, hp: ClicHyperParams, tol: float = 1e-10,
                    tamper: bool = False) -> list[OracleReport]:
    """Enumeration-weighted Rand index against the closed form, and the
    affine decomposition through the independent-CRP baseline."""
    if n not in (3, 4):
        raise ValueError("exact ERI check runs at n = 3 or 4")
    start = time.perf_counter()
    parts = enumerate_partitions(n)
    table = stirling_table(n)
    g1, g2 = hp.gammas[0], hp.gammas[1]
    enum = math.fsum(pair_loop_rand(a, b) * math.exp(clic_log_meppf(a, b, hp, table))
                     for a, b in itertools.product(parts, parts))
    if tamper:
        # deliberately wrong dependence weight; the check must fail
        nu = 1.0 / (hp.rho + 2.0)
        tau0 = (1.0 + g1 * g2) / ((g1 + 1.0) * (g2 + 1.0))
        reference = nu + (1.0 - nu) * tau0
    else:
        reference = expected_rand_infinite(hp)
    out = [_report(f"eri_exact[n={n},{_tag(hp)}]", enum, reference, tol, start)]

    start = time.perf_counter()
    tau0_enum = _independent_crp_rand(parts, g1, g2)
    nu = 1.0 / (hp.rho + 1.0)
    out.append(_report(f"eri_affine_bridge[n={n},{_tag(hp)}]", enum,
                       nu + (1.0 - nu) * tau0_enum, tol, start))
    return out


def check_eri_independence_limit(n: int = 3, gamma: float = 1.0, rho: float = 1e6,
                                 tol: float = 1e-5) -> OracleReport:
    start = time.perf_counter()
    hp = ClicHyperParams(rho, (gamma, gamma))
    parts = enumerate_partitions(n)
    table = stirling_table(n)
    enum = math.fsum(pair_loop_rand(a, b) * math.exp(clic_log_meppf(a, b, hp, table))
                     for a, b in itertools.product(parts, parts))
    return _report(f"eri_independence_limit[n={n},{_tag(hp)}]", enum,
                   (1.0 + gamma**2) / (1.0 + gamma) ** 2, tol, start)


def check_marginalization(n: int, hp: ClicHyperParams, tol: float = 1e-10) -> OracleReport:
    start = time.perf_counter()
    if n > 4:
        raise ValueError("marginalization check limited to n <= 4")
    parts = enumerate_partitions(n)
    table = stirling_table(n)
    worst = 0.0
    for a in parts:
        joint = math.fsum(math.exp(clic_log_meppf(a, b, hp, table)) for b in parts)
        marg = math.exp(marginal_log_eppf(a, hp.rho, hp.gammas[0], table))
        worst = max(worst, abs(joint - marg))
    return _report(f"marginalization[n={n},{_tag(hp)}]", worst, 0.0, tol, start,
                   "max |sum_C2 joint - marginal|")


def _root_pair(r: np.ndarray):
    """Canonical root partitions of ``r.sum()`` objects with cell sizes ``r``."""
    rows, cols = [], []
    for (k1, k2), size in np.ndenumerate(r):
        rows += [k1] * int(size)
        cols += [k2] * int(size)
    return canonicalize(rows), canonicalize(cols)


def root_decomposition_prob(c1, c2, hp: ClicHyperParams) -> float:
    """Joint PMF rebuilt as a mixture over the root sample size ``w``.

    ``P(W = w) = |s(n, w)| rho^w / (rho)^(n)``; given ``w``, independent CRP
    root partitions of ``w`` objects are perturbed into the observed pair
    with probability ``prod |s(n_cell, r_cell)| / |s(n, w)|``.
    """
    a = canonicalize(c1)
    b = canonicalize(c2)
    n = a.size
    counts = np.zeros((a.max(), b.max()), dtype=np.int64)
    for i in range(n):
        counts[a[i] - 1, b[i] - 1] += 1
    cells = [(k1, k2) for (k1, k2), c in np.ndenumerate(counts) if c > 0]
    s_n = stirling_by_expansion(n)
    s_cell = {int(c): stirling_by_expansion(int(c)) for c in counts[counts > 0]}
    rho = hp.rho
    log_rising_rho = math.lgamma(rho + n) - math.lgamma(rho)
    total = 0.0
    for choice in itertools.product(*[range(1, counts[c] + 1) for c in cells]):
        r = np.zeros_like(counts)
        for cell, val in zip(cells, choice):
            r[cell] = val
        w = int(r.sum())
        weight = s_n[w] * math.exp(w * math.log(rho) - log_rising_rho)
        t1, t2 = _root_pair(r)
        root = math.exp(crp_log_pmf(t1, hp.gammas[0]) + crp_log_pmf(t2, hp.gammas[1]))
        perturb = math.prod(s_cell[int(counts[c])][val] for c, val in zip(cells, choice)) / s_n[w]
        total += weight * root * perturb
    return total


def check_root_decomposition(n: int, hp: ClicHyperParams, tol: float = 1e-9) -> OracleReport:
    start = time.perf_counter()
    if n > 4:
        raise ValueError("root decomposition check limited to n <= 4")
    parts = enumerate_partitions(n)
    table = stirling_table(n)
    worst = 0.0
    for a, b in itertools.product(parts, parts):
        worst = max(worst, abs(root_decomposition_prob(a, b, hp)
                               - math.exp(clic_log_meppf(a, b, hp, table))))
    return _report(f"root_decomposition[n={n},{_tag(hp)}]", worst, 0.0, tol, start,
                   "max |mixture - joint|")


def check_stirling(n_max: int = 20, tol: float = 1e-10) -> list[OracleReport]:
    """Row sums equal ``n!`` and entries match exact expansion."""
    start = time.perf_counter()
    table = stirling_table(n_max)
    worst = 0.0
    for n in range(1, n_max + 1):
        row_sum = math.fsum(math.exp(x) for x in table.row(n))
        worst = max(worst, abs(row_sum / math.factorial(n) - 1.0))
    out = [_report(f"stirling_row_sums[n<={n_max}]", worst, 0.0, tol, start,
                   "max relative error")]
    start = time.perf_counter()
    worst = 0.0
    for n in range(0, 9):
        exact = stirling_by_expansion(n)
        for w in range(n + 1):
            got = math.exp(table(n, w)) if exact[w] else (0.0 if table(n, w) == -math.inf else 1.0)
            worst = max(worst, abs(got - exact[w]) / max(1, exact[w]))
    out.append(_report("stirling_direct_expansion[n<=8]", worst, 0.0, tol, start,
                       "max relative error"))
    return out


@dataclass(frozen=True)
class GewekeConfig:
    n: int = 15
    n_components: int = 5
    gamma: float = 1.0
    rho: FixedRho | GammaRho = FixedRho(1.0)
    draws: int = 10000
    thin: int = 20
    burn_in: int = 500
    seed: int = 2024
    alpha: float = 0.001


def _rand_rows(labels: np.ndarray) -> np.ndarray:
    a, b = labels[:, 0], labels[:, 1]
    i, j = np.triu_indices(labels.shape[2], 1)
    return ((a[:, i] == a[:, j]) == (b[:, i] == b[:, j])).mean(axis=1)


def _n_clusters_rows(labels: np.ndarray) -> np.ndarray:
    s = np.sort(labels, axis=-1)
    return 1 + (np.diff(s, axis=-1) != 0).sum(axis=-1)


def check_geweke(config: GewekeConfig = GewekeConfig()) -> list[OracleReport]:
    """Flat-likelihood Gibbs output against forward draws from the finite prior."""
    from .inference import effective_sample_size

    start = time.perf_counter()
    ss = np.random.SeedSequence(config.seed)
    fwd_rng, gibbs_rng = (np.random.default_rng(s) for s in ss.spawn(2))
    L = config.n_components
    hp = ClicHyperParams(1.0, (config.gamma, config.gamma))
    fp = FiniteApproxParams((L, L), hp)
    if isinstance(config.rho, GammaRho):
        rho_fwd = fwd_rng.gamma(config.rho.shape, 1.0 / config.rho.rate, config.draws)
        variant = f"gamma({config.rho.shape:g},{config.rho.rate:g})"
    else:
        rho_fwd = np.full(config.draws, config.rho.value)
        variant = f"fixed({config.rho.value:g})"
    fwd = sample_finite_prior_batch(config.n, fp, config.draws, fwd_rng, rho=rho_fwd)
    sc = SamplerConfig(
        n_components=(L, L), gammas=(config.gamma, config.gamma), rho=config.rho,
        iterations=config.burn_in + config.draws * config.thin, burn_in=config.burn_in,
        thin=config.thin, flat_likelihood=True,
    )
    trace = run_chain(None, sc, rng=gibbs_rng, n=config.n)
    setup = time.perf_counter() - start

    out = []
    # both sides take values k / C(n, 2); round so equal values tie exactly
    fwd_rand = np.round(_rand_rows(fwd), 12)
    gibbs_rand = np.round(trace.rand[:, 0], 12)
    series = {
        "rand": (fwd_rand, gibbs_rand),
        "k1": (_n_clusters_rows(fwd[:, 0]), trace.k[:, 0]),
        "k2": (_n_clusters_rows(fwd[:, 1]), trace.k[:, 1]),
    }
    for key, (x, y) in series.items():
        t0 = time.perf_counter()
        p = stats.ks_2samp(x, y).pvalue
        out.append(OracleReport(f"geweke_ks_{key}[{variant}]", float(p), config.alpha, float("nan"),
                                bool(p > config.alpha), time.perf_counter() - t0 + setup,
                                "two-sample KS p-value vs threshold"))
    if isinstance(config.rho, FixedRho):
        target = expected_rand_finite(FiniteApproxParams(
            (L, L), ClicHyperParams(config.rho.value, (config.gamma, config.gamma))))
        for key, x, ess in (("forward", fwd_rand, fwd_rand.size),
                            ("gibbs", gibbs_rand, effective_sample_size(gibbs_rand))):
            se = x.std(ddof=1) / math.sqrt(ess)
            out.append(_report(f"geweke_mean_rand_{key}[{variant}]", x.mean(), target,
                               4 * se, start, f"4 SE, ESS={ess:.0f}"))
    else:
        prior_mean = config.rho.shape / config.rho.rate
        ess = effective_sample_size(trace.rho)
        se = trace.rho.std(ddof=1) / math.sqrt(ess)
        out.append(_report(f"geweke_rho_mean[{variant}]", trace.rho.mean(), prior_mean,
                           4 * se, start, f"4 SE, ESS={ess:.0f}"))
    return out


HYPER_GRID = (
    ClicHyperParams(1.0, (1.0, 1.0)),
    ClicHyperParams(2.0, (0.5, 3.0)),
    ClicHyperParams(0.3, (1.0, 1.0)),
)


def eri_grid(rhos=(0.5, 1.0, 3.0), gammas=(0.5, 1.0, 2.0)):
    """Closed-form ERI on a grid, as ``(rho, gamma1, gamma2, value)`` rows."""
    return [(r, g, g, expected_rand_infinite(ClicHyperParams(r, (g, g))))
            for r in rhos for g in gammas]


def run_all(tamper: bool = False, geweke: bool = True) -> list[OracleReport]:
    reports = []
    for hp in HYPER_GRID:
        for n in (1, 2, 3, 4):
            reports.append(check_meppf_normalization(n, hp))
    for r, g1, g2, _ in eri_grid():
        for n in (3, 4):
            reports += check_eri_exact(n, ClicHyperParams(r, (g1, g2)), tamper=tamper)
    reports.append(check_eri_exact(4, ClicHyperParams(0.5, (1.0, 2.0)), tamper=tamper)[0])
    for g in (0.5, 1.0, 2.0):
        reports.append(check_eri_independence_limit(3, g))
    for hp in HYPER_GRID:
        reports.append(check_marginalization(4, hp))
    for n in (2, 3):
        for hp in (ClicHyperParams(1.0, (1.0, 1.0)), ClicHyperParams(3.0, (0.5, 2.0))):
            reports.append(check_root_decomposition(n, hp))
    reports += check_stirling()
    if geweke:
        reports += check_geweke(GewekeConfig())
        reports += check_geweke(GewekeConfig(rho=GammaRho(1.0, 1.0), seed=2025))
    return reports
