import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clic.partitions import (
    adjusted_rand_index,
    canonicalize,
    contingency,
    enumerate_partitions,
    n_clusters,
    rand_index,
    variation_of_information,
)

labels_st = st.lists(st.integers(1, 6), min_size=2, max_size=25)


def paired(min_size=2):
    return st.integers(min_size, 25).flatmap(
        lambda n: st.tuples(st.lists(st.integers(1, 6), min_size=n, max_size=n),
                            st.lists(st.integers(1, 6), min_size=n, max_size=n)))


def bell_triangle(n):
    row = [1]
    for _ in range(n - 1):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[-1]


def coclustered(c):
    c = list(c)
    return {(i, j) for i, j in itertools.combinations(range(len(c)), 2) if c[i] == c[j]}


class TestCanonicalize:
    @pytest.mark.parametrize("raw, expected", [
        ((2, 2, 5, 2), (1, 1, 2, 1)),
        ((1, 2, 3), (1, 2, 3)),
        ((3, 1, 3, 1), (1, 2, 1, 2)),
    ])
    def test_examples(self, raw, expected):
        assert tuple(canonicalize(raw)) == expected

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            canonicalize([])

    @given(labels_st)
    def test_idempotent_and_same_partition(self, raw):
        c = canonicalize(raw)
        assert np.array_equal(canonicalize(c), c)
        assert coclustered(c) == coclustered(raw)
        assert c[0] == 1
        seen = 0
        for x in c:
            assert x <= seen + 1
            seen = max(seen, x)
        assert n_clusters(c) == c.max()


class TestContingency:
    def test_examples(self):
        assert contingency([1, 1, 2], [1, 2, 2]).counts.tolist() == [[1, 1], [0, 1]]
        assert contingency([1, 1, 1], [1, 1, 1]).counts.tolist() == [[3]]
        assert contingency([1, 2], [1, 2]).counts.tolist() == [[1, 0], [0, 1]]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            contingency([1, 2], [1, 2, 3])

    @given(paired())
    def test_marginals_recover_cluster_sizes(self, pair):
        a, b = pair
        t = contingency(a, b)
        assert t.n == len(a)
        assert t.row_sums.tolist() == np.bincount(canonicalize(a))[1:].tolist()
        assert t.col_sums.tolist() == np.bincount(canonicalize(b))[1:].tolist()
        assert np.all(t.row_sums > 0) and np.all(t.col_sums > 0)


class TestRand:
    def test_examples(self):
        assert rand_index([1, 2, 1, 3], [4, 5, 4, 1]) == 1.0
        assert rand_index([1, 2], [1, 1]) == 0.0
        assert rand_index([1, 1, 2], [1, 2, 2]) == pytest.approx(1 / 3, abs=1e-15)

    def test_too_short(self):
        with pytest.raises(ValueError):
            rand_index([1], [1])

    @given(paired())
    def test_matches_pair_count_and_bounds(self, pair):
        a, b = pair
        n = len(a)
        agree = sum((a[i] == a[j]) == (b[i] == b[j]) for i, j in itertools.combinations(range(n), 2))
        r = rand_index(a, b)
        assert r == pytest.approx(agree / math.comb(n, 2), abs=1e-12)
        assert 0.0 <= r <= 1.0
        assert (r == 1.0) == np.array_equal(canonicalize(a), canonicalize(b))

    @given(paired(), st.permutations(range(1, 7)))
    def test_label_permutation_invariance(self, pair, perm):
        a, b = pair
        relabel = [perm[x - 1] for x in a]
        assert rand_index(relabel, b) == pytest.approx(rand_index(a, b), abs=1e-15)
        assert_ari_equal(adjusted_rand_index, relabel, a, b)


def assert_ari_equal(fn, relabel, a, b):
    try:
        expected = fn(a, b)
    except ValueError:
        with pytest.raises(ValueError):
            fn(relabel, b)
        return
    assert fn(relabel, b) == pytest.approx(expected, abs=1e-12)


class TestARI:
    def test_identical(self):
        assert adjusted_rand_index([1, 1, 2, 3], [1, 1, 2, 3]) == 1.0
        assert adjusted_rand_index([1, 1, 2, 2], [2, 2, 1, 1]) == 1.0

    def test_anti_correlated_is_negative(self):
        # hand count: index 0, expected 2*2/6, max 2 -> (0 - 2/3)/(2 - 2/3) = -0.5
        assert adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5, abs=1e-15)

    def test_degenerate(self):
        assert adjusted_rand_index([1, 2, 3], [1, 2, 3]) == 1.0
        assert adjusted_rand_index([1, 1, 1], [1, 1, 1]) == 1.0
        # one block against all singletons: index and expectation both 0, denominator 1.5
        assert adjusted_rand_index([1, 1, 1], [1, 2, 3]) == 0.0

    @given(paired())
    def test_at_most_one(self, pair):
        try:
            assert adjusted_rand_index(*pair) <= 1.0 + 1e-12
        except ValueError:
            pass


class TestVI:
    def test_examples(self):
        assert variation_of_information([1, 2, 2], [3, 1, 1]) == 0.0
        assert variation_of_information([1, 1], [1, 2]) == pytest.approx(math.log(2), abs=1e-15)

    @given(paired())
    def test_symmetric_nonnegative(self, pair):
        a, b = pair
        assert variation_of_information(a, b) == pytest.approx(variation_of_information(b, a), abs=1e-12)
        assert variation_of_information(a, b) >= 0.0

    def test_triangle_inequality_on_p4(self):
        parts = enumerate_partitions(4)
        d = np.array([[variation_of_information(a, b) for b in parts] for a in parts])
        for i, j, k in itertools.product(range(len(parts)), repeat=3):
            assert d[i, k] <= d[i, j] + d[j, k] + 1e-12


class TestEnumeration:
    @pytest.mark.parametrize("n", range(1, 9))
    def test_bell_numbers(self, n):
        parts = enumerate_partitions(n)
        assert len(parts) == bell_triangle(n)
        assert len({tuple(p) for p in parts}) == len(parts)
        assert all(np.array_equal(canonicalize(p), p) for p in parts)

    def test_small_cases(self):
        assert [tuple(p) for p in enumerate_partitions(1)] == [(1,)]
        assert len(enumerate_partitions(3)) == 5
        assert len(enumerate_partitions(5)) == 52

    @pytest.mark.parametrize("n", [0, 13])
    def test_guard(self, n):
        with pytest.raises(ValueError):
            enumerate_partitions(n)
