import math

import numpy as np
import pytest

from clic.kernels import loglik_table_gaussian
from clic.partitions import rand_index
from clic.simulate import alternating, gen_correlated, gen_three_view, gen_two_view, gen_varying

N = 100_000


def binom_ok(hits, n, p, k=4.0):
    return abs(hits / n - p) <= k * math.sqrt(p * (1 - p) / n)


def rng(seed=0):
    return np.random.default_rng(seed)


class TestTwoView:
    def test_case1_identical(self):
        d = gen_two_view(1, 0.2, 500, rng())
        assert rand_index(*d.labels) == 1.0
        assert d.views[0].shape == (500, 1) and d.views[1].shape == (500, 1)

    def test_case3_independent(self):
        d = gen_two_view(3, 0.2, N, rng(1))
        c1, c2 = d.labels
        assert binom_ok((c1 == c2).sum(), N, 0.5)
        # pairwise Rand of two independent fair binary labels is 1/2
        sub = slice(0, 4000)
        assert rand_index(c1[sub], c2[sub]) == pytest.approx(0.5, abs=0.01)

    def test_case2_agreement(self):
        c1, c2 = gen_two_view(2, 0.45, N, rng(2)).labels
        assert binom_ok((c1 == c2).sum(), N, 2 / 3 + 1 / 6)

    def test_view_one_is_fair(self):
        for case in (1, 2, 3):
            c1 = gen_two_view(case, 0.2, N, rng(case)).labels[0]
            assert binom_ok((c1 == 1).sum(), N, 0.5)

    def test_means_and_variances(self):
        d = gen_two_view(3, 0.45, N, rng(3))
        x1, x2 = d.views[0][:, 0], d.views[1][:, 0]
        c1, c2 = d.labels
        assert x1[c1 == 1].mean() == pytest.approx(1.0, abs=0.02)
        assert x1[c1 == 2].mean() == pytest.approx(-1.0, abs=0.02)
        assert x2[c2 == 1].mean() == pytest.approx(-1.0, abs=0.02)
        assert x2[c2 == 2].mean() == pytest.approx(1.0, abs=0.02)
        assert x1[c1 == 1].var() == pytest.approx(0.2, rel=0.03)
        assert x2[c2 == 2].var() == pytest.approx(0.45, rel=0.03)

    def test_reproducible(self):
        a, b = gen_two_view(2, 0.2, 50, rng(9)), gen_two_view(2, 0.2, 50, rng(9))
        assert all(np.array_equal(x, y) for x, y in zip(a.views + a.labels, b.views + b.labels))

    @pytest.mark.parametrize("args", [(4, 0.2, 10), (1, 0.0, 10), (1, 0.2, 1)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            gen_two_view(*args, rng())

    def test_true_labels_beat_swapped(self):
        d = gen_two_view(2, 0.2, 400, rng(4))
        for v, var in zip((0, 1), (0.2, 0.2)):
            means = np.array([[1.0], [-1.0]]) if v == 0 else np.array([[-1.0], [1.0]])
            tab = loglik_table_gaussian(d.views[v], means, 1 / var)
            c = d.labels[v] - 1
            true = tab[np.arange(400), c].mean()
            swapped = tab[np.arange(400), 1 - c].mean()
            assert true > swapped


class TestThreeView:
    def test_mechanism(self):
        d = gen_three_view(N, rng(5))
        c1, c2, c3 = d.labels
        assert binom_ok((c2 == c1).sum(), N, 1 / 3)
        assert binom_ok((c3 == 1).sum(), N, 0.5)
        # c3 equals c1 when copied from c1, or from c2 when c2 = c1, or a fair draw agrees
        assert binom_ok((c3 == c1).sum(), N, 1 / 3 + (1 / 3) * (1 / 3) + (1 / 3) * 0.5)

    def test_means(self):
        d = gen_three_view(N, rng(6))
        x3, c3 = d.views[2][:, 0], d.labels[2]
        assert x3[c3 == 1].mean() == pytest.approx(2.0, abs=0.02)
        assert x3[c3 == 2].mean() == pytest.approx(-2.0, abs=0.02)
        assert x3[c3 == 1].var() == pytest.approx(1.0, rel=0.03)
        x2, c2 = d.views[1][:, 0], d.labels[1]
        assert x2[c2 == 1].mean() == pytest.approx(-1.0, abs=0.02)
        assert x2[c2 == 1].var() == pytest.approx(0.2, rel=0.03)


class TestVarying:
    def test_alternating(self):
        assert alternating(2).tolist() == [1.0, -1.0]
        assert alternating(5).tolist() == [1.0, -1.0, 1.0, -1.0, 1.0]

    def test_shapes_and_means(self):
        d = gen_varying(N, 2, rng(7))
        c1, c2 = d.labels
        assert d.views[0].shape == (N, 2) and d.views[1].shape == (N, 2)
        assert d.views[1][c2 == 1].mean(axis=0) == pytest.approx([1.0, -1.0], abs=0.02)
        assert d.views[1][c2 == 2].mean(axis=0) == pytest.approx([-1.0, 1.0], abs=0.02)
        assert d.views[0][c1 == 2].var(axis=0) == pytest.approx([0.4, 0.4], rel=0.03)

    def test_agreement(self):
        c1, c2 = gen_varying(N, 3, rng(8)).labels
        assert binom_ok((c1 == c2).sum(), N, 0.8 + 0.2 * 0.5)

    @pytest.mark.parametrize("d2", [1, 10, 50])
    def test_rows(self, d2):
        d = gen_varying(30, d2, rng())
        assert [x.shape for x in d.views] == [(30, 2), (30, d2)]
        assert all(len(c) == 30 for c in d.labels)


class TestCorrelated:
    def test_slopes_and_residual(self):
        d = gen_correlated(3, 0.45, N, rng(10))
        x1, x2 = d.views[0][:, 0], d.views[1][:, 0]
        c2 = d.labels[1]
        assert np.corrcoef(x1[c2 == 1], x2[c2 == 1])[0, 1] < 0
        assert np.corrcoef(x1[c2 == 2], x2[c2 == 2])[0, 1] > 0
        slope = np.where(c2 == 1, -1.0, 1.0)
        assert (x2 - slope * x1).std() == pytest.approx(math.sqrt(0.45), rel=0.02)
        assert d.model == "correlated"

    def test_case1(self):
        assert rand_index(*gen_correlated(1, 0.2, 300, rng()).labels) == 1.0
