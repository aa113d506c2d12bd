from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_expansions
from sl2ext.core import ext_dim
from sl2ext.errors import CapacityError
from sl2ext.partitions import (
    Expansion,
    RunForm,
    check_lower_bound,
    count_pow2_partitions,
    enumerate_expansions,
    pow2_partition_table,
    psi_map,
    stewart_identity,
)


def test_expansion_validation():
    assert Expansion((3, 1, 1)).target == 12
    with pytest.raises(ValueError):
        Expansion((1, 3))
    with pytest.raises(ValueError):
        Expansion((1, -1))
    e = Expansion((4, 4, 2, 0, 0, 0))
    assert e.run_form() == RunForm(((4, 2), (2, 1), (0, 3)))
    assert e.run_form().expansion() == e
    with pytest.raises(ValueError):
        RunForm(((1, 1), (2, 1)))


@pytest.mark.parametrize("t, N, want", [(4, 39, 1), (3, 5, 1), (1, 8, 1), (2, 3, 1), (0, 0, 1), (3, 0, 0), (5, 4, 0)])
def test_count_examples(t, N, want):
    assert count_pow2_partitions(t, N) == want


@settings(max_examples=150, deadline=None)
@given(t=st.integers(0, 7), N=st.integers(0, 200))
def test_count_matches_brute_force(t, N):
    assert count_pow2_partitions(t, N) == brute_expansions(2, t, N)


def test_table_matches_pointwise():
    T = pow2_partition_table(10, 600)
    for t in range(11):
        for N in range(601):
            assert T[t, N] == count_pow2_partitions(t, N)


def test_count_is_ext_dim():
    for d in range(300):
        for n in range(10):
            assert count_pow2_partitions(n + 1, d + 1) == ext_dim(2, n, d)


@pytest.mark.parametrize("N, t, want", [(4, 2, [(1, 1)]), (4, 3, [(1, 0, 0)]), (3, 4, [])])
def test_enumerate_examples(N, t, want):
    assert [e.parts for e in enumerate_expansions(N, t)] == want


@settings(max_examples=80, deadline=None)
@given(t=st.integers(1, 6), N=st.integers(1, 150))
def test_enumeration_is_sorted_complete_and_valid(t, N):
    exps = enumerate_expansions(N, t)
    assert len(exps) == count_pow2_partitions(t, N)
    assert exps == sorted(exps)
    assert len(set(exps)) == len(exps)
    assert all(e.target == N and len(e) == t for e in exps)


def test_enumeration_limit():
    with pytest.raises(CapacityError):
        enumerate_expansions(2**10, 12, limit=5)


def test_psi_run_form_cases():
    # c1 - 1 > c2: (4^2, 1) -> (4, 3^2, 1)
    assert psi_map(Expansion((4, 4, 1))).run_form() == RunForm(((4, 1), (3, 2), (1, 1)))
    # c1 - 1 = c2: (3, 2^2) -> (2^4)
    assert psi_map(Expansion((3, 2, 2))).run_form() == RunForm(((2, 4),))
    with pytest.raises(ValueError):
        psi_map(Expansion((1, 1, 0)))


@pytest.mark.parametrize("m", range(4, 11))
def test_psi_preserves_sum_and_adds_one_part(m):
    for e in enumerate_expansions(2**m, 2 * m - 2):
        img = psi_map(e)
        assert img.target == 2**m and len(img) == 2 * m - 1


def test_psi_collision_at_m4():
    # two distinct expansions of 16 with 6 parts share an image
    a, b = Expansion((3, 1, 1, 1, 0, 0)), Expansion((2, 2, 2, 1, 0, 0))
    assert a.target == b.target == 16
    assert psi_map(a) == psi_map(b) == Expansion((2, 2, 1, 1, 1, 0, 0))


@pytest.mark.parametrize("m", range(4, 12))
def test_size_inequality_holds(m):
    assert count_pow2_partitions(2 * m - 2, 2**m) <= count_pow2_partitions(2 * m - 1, 2**m)


def test_lower_bound_examples():
    r = check_lower_bound(2)
    assert (r.count, r.bound, r.passed) == (1, 1, True)
    assert [check_lower_bound(t).count for t in range(2, 9)] == [1, 2, 4, 10, 27, 80, 242]
    with pytest.raises(ValueError):
        check_lower_bound(1)


def test_stewart_small():
    assert [stewart_identity(m).lhs for m in range(1, 6)] == [1, 1, 1, 2, 3]
    assert all(stewart_identity(m).passed for m in range(1, 12))
