from __future__ import annotations

from collections import Counter
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_label_solutions
from sl2ext.core import ext_dim
from sl2ext.labels import (
    Label,
    build_labels,
    ext_dim_via_labels,
    ext_dims_via_labels,
    label_solutions,
    label_sum_histogram,
    length_set,
    length_spectrum,
    predicted_length_count,
    witness_weight,
)


def test_small_label_lists():
    assert [str(L) for L in build_labels(0)] == ["(k_0)"]
    assert [str(L) for L in build_labels(1)] == ["(k_1+1)", "(k_1, k_1+k_0+1)"]
    two = [str(L) for L in build_labels(2)]
    assert two == ["(k_2+1, k_2+k_0)", "(k_2, k_2+k_1+2)", "(k_2, k_2+k_1+1, k_2+k_1+k_0+2)"]


def test_label_validation():
    with pytest.raises(ValueError):
        Label((), (1,), (0,))
    with pytest.raises(ValueError):
        Label((0, 1), (2,), (0,))
    with pytest.raises(ValueError):
        Label((0, 1), (1, 1), (0, 1))
    with pytest.raises(ValueError):
        Label((0,), (1, 2), (0, 1))


def test_exponents():
    L = build_labels(2)[2]
    assert L.exponents((3, 5, 2)) == (3, 9, 12)
    with pytest.raises(ValueError):
        L.exponents((1,))


def test_labels_are_distinct_and_offsets_bounded():
    for n in range(14):
        labels = build_labels(n)
        assert len(set(labels)) == len(labels)
        assert all(max(L.offsets) <= n for L in labels)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(0, 5), idx=st.integers(0, 50), N=st.integers(1, 400))
def test_solutions_match_brute_force(n, idx, N):
    labels = build_labels(n)
    L = labels[idx % len(labels)]
    assert label_solutions(L, 3, N) == brute_label_solutions(L, 3, N)


def test_histogram_matches_pointwise():
    for L in build_labels(4):
        hist = label_sum_histogram(L, 5, 700)
        for N in range(1, 701):
            assert hist.get(N, 0) == label_solutions(L, 5, N)


def test_weight_76_per_label_counts():
    assert [label_solutions(L, 3, 39) for L in build_labels(3)] == [0, 2, 1, 0, 0]
    assert ext_dim_via_labels(3, 3, 38) == 3


@pytest.mark.parametrize("p", [3, 5, 7])
def test_label_counts_match_recursion(p):
    for n in range(7):
        assert ext_dims_via_labels(p, n, 400) == [ext_dim(p, n, d) for d in range(401)]


def test_labels_reject_p2():
    with pytest.raises(ValueError):
        ext_dim_via_labels(2, 1, 3)


def test_length_spectrum_small():
    assert length_spectrum(0) == Counter({1: 1})
    assert length_spectrum(1) == Counter({1: 1, 2: 1})
    # three labels of degree 2: two of length 2, one of length 3
    assert length_spectrum(2) == Counter({2: 2, 3: 1})


@pytest.mark.parametrize("n", range(0, 16))
def test_length_spectrum_formula(n):
    spectrum = length_spectrum(n)
    assert set(spectrum) == length_set(n)
    for length, count in spectrum.items():
        assert count == predicted_length_count(n, length)
    assert spectrum[n + 1] == 1


def test_predicted_counts_are_binomials():
    assert predicted_length_count(6, 4) == comb(4, 3)
    assert predicted_length_count(6, 9) == 0


def test_witness():
    w = witness_weight(3, 3, 3)
    assert w.exponents == (4, 8, 12)
    assert w.weight_sum == 3**4 + 3**8 + 3**12 == 538083
    assert w.bound == 3
    labels = [L for L in build_labels(3) if len(L) == 3]
    for L, ks in zip(labels, w.assignments):
        assert L.exponents(ks) == w.exponents
    assert ext_dim(3, 3, w.d) >= w.bound
    with pytest.raises(ValueError):
        witness_weight(3, 9, 3)


@pytest.mark.parametrize("n, k", [(4, 3), (4, 4), (5, 3), (5, 4)])
def test_witness_bound_holds(n, k):
    # weights here are far beyond any table, so count through the labels
    w = witness_weight(n, k, 3)
    assert sum(label_solutions(L, 3, w.weight_sum) for L in build_labels(n)) >= w.bound
