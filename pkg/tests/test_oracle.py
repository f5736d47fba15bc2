import math

import numpy as np
import pytest

from clic.oracle import (
    GewekeConfig,
    OracleReport,
    check_eri_exact,
    check_eri_independence_limit,
    check_geweke,
    check_marginalization,
    check_meppf_normalization,
    check_root_decomposition,
    check_stirling,
    eri_grid,
    pair_loop_rand,
    root_decomposition_prob,
    run_all,
    stirling_by_expansion,
)
from clic.partitions import enumerate_partitions, rand_index
from clic.prior import ClicHyperParams, marginal_log_eppf, prior_k_distribution, table_count_log_pmf
from clic.sampler import FixedRho


class TestHelpers:
    def test_stirling_expansion(self):
        assert stirling_by_expansion(0) == [1]
        assert stirling_by_expansion(3) == [0, 2, 3, 1]
        assert stirling_by_expansion(4) == [0, 6, 11, 6, 1]
        assert sum(stirling_by_expansion(7)) == math.factorial(7)

    def test_pair_loop_rand(self):
        for a in enumerate_partitions(4):
            for b in enumerate_partitions(4):
                assert pair_loop_rand(a, b) == pytest.approx(rand_index(a, b), abs=1e-15)

    def test_report_line(self):
        r = OracleReport("x", 1.0, 1.0, 1e-9, True, 0.0)
        assert r.line().startswith("PASS x:")
        assert OracleReport("y", 2.0, 1.0, 1e-9, False, 0.0).line().startswith("FAIL y:")


class TestChecks:
    def test_normalization_examples(self):
        assert check_meppf_normalization(1, ClicHyperParams()).computed == 1.0
        assert check_meppf_normalization(4, ClicHyperParams(2.0, (0.5, 3.0))).passed
        with pytest.raises(ValueError):
            check_meppf_normalization(6, ClicHyperParams())

    def test_eri_examples(self):
        reports = check_eri_exact(3, ClicHyperParams(1.0, (1.0, 1.0)))
        assert all(r.passed for r in reports)
        assert reports[0].computed == pytest.approx(0.75, abs=1e-10)
        assert all(r.passed for r in check_eri_exact(4, ClicHyperParams(0.5, (1.0, 2.0))))
        assert check_eri_independence_limit(3, 1.0).passed

    def test_tamper_fails(self):
        reports = check_eri_exact(3, ClicHyperParams(1.0, (1.0, 1.0)), tamper=True)
        assert not reports[0].passed

    def test_marginalization_and_root(self):
        hp = ClicHyperParams(3.0, (0.5, 2.0))
        assert check_marginalization(4, hp).passed
        assert check_root_decomposition(3, hp).passed

    def test_root_mixture_n2_by_hand(self):
        # P(W=1) = 1/2 at rho=1, n=2; root of one object is trivially shared
        hp = ClicHyperParams(1.0, (1.0, 1.0))
        assert root_decomposition_prob([1, 1], [1, 1], hp) == pytest.approx(0.5 + 0.5 * 0.25, abs=1e-14)

    def test_stirling_checks(self):
        assert all(r.passed for r in check_stirling())

    def test_geometric_root_weights_are_not_the_root_law(self):
        # weights rho^(w-1)(1-rho)/(1-rho^n) disagree with the enumerated
        # cluster-count law, while the Stirling-weighted law reproduces it
        n, rho, gamma = 4, 2.0, 1.0
        geometric = np.array([rho ** (w - 1) * (1 - rho) / (1 - rho ** n) for w in range(1, n + 1)])
        stirling = np.exp(table_count_log_pmf(n, rho))[1:]
        assert np.abs(geometric - stirling).max() > 0.05
        enum = np.zeros(n + 1)
        for c in enumerate_partitions(n):
            enum[c.max()] += math.exp(marginal_log_eppf(c, rho, gamma))
        assert prior_k_distribution(n, rho, gamma) == pytest.approx(enum, abs=1e-12)

    def test_eri_grid_rows(self):
        rows = eri_grid()
        assert len(rows) == 9
        assert all(0 < r[3] <= 1 for r in rows)


def test_run_all_without_sampler():
    reports = run_all(geweke=False)
    assert len(reports) > 50
    failed = [r.line() for r in reports if not r.passed]
    assert not failed, failed


def test_run_all_tamper_fails():
    assert any(not r.passed for r in run_all(tamper=True, geweke=False))


def test_geweke_small():
    cfg = GewekeConfig(n=8, n_components=3, rho=FixedRho(0.7), draws=2000, thin=10, burn_in=200, seed=5)
    reports = check_geweke(cfg)
    assert len(reports) == 5
    assert all(r.passed for r in reports), [r.line() for r in reports]
