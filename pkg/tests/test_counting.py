import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partition_lab import counting
from partition_lab.counting import (
    CountCache,
    Partition,
    ceil_div,
    count_at_most,
    count_bounded,
    count_distinct,
    count_with_largest,
    erdos_lehner_log_estimate,
    hr_log_upper_bound,
    identity_count,
    identity_cutoff,
    log_int,
    residue_j,
)

from conftest import brute_partitions, recurrence_bounded


@pytest.mark.parametrize("n,m,expected", [(0, 5, 1), (7, 1, 1), (5, 2, 3), (10, 10, 42), (10, 3, 14),
                                          (100, 100, 190569292), (3, 0, 0), (0, 0, 1)])
def test_count_at_most_examples(n, m, expected):
    assert count_at_most(n, m) == expected


def test_count_at_most_matches_brute_force():
    for n in range(0, 26):
        for m in range(0, n + 1):
            assert count_at_most(n, m) == len(brute_partitions(n, m)), (n, m)


@pytest.mark.parametrize("n,m,b,expected", [(5, 2, 3, 1), (4, 2, 2, 1), (10, 3, 10, 14), (6, 3, 0, 0), (0, 2, 0, 1)])
def test_count_bounded_examples(n, m, b, expected):
    assert count_bounded(n, m, b) == expected


def test_count_bounded_matches_recurrence_table():
    for n in range(0, 40):
        for m in range(0, 9):
            for b in range(0, 16):
                assert count_bounded(n, m, b) == recurrence_bounded(n, m, b), (n, m, b)


@given(st.integers(0, 120), st.integers(0, 15), st.integers(0, 60))
@settings(max_examples=300, deadline=None)
def test_bounded_matches_recurrence_property(n, m, b):
    assert count_bounded(n, m, b) == recurrence_bounded(n, m, b)


@given(st.integers(0, 200), st.integers(0, 30))
@settings(max_examples=100, deadline=None)
def test_bounded_cap_inactive(n, m):
    assert count_bounded(n, m, n) == count_at_most(n, m)


@given(st.integers(1, 150), st.integers(1, 12), st.integers(1, 40), st.integers(1, 40))
@settings(max_examples=200, deadline=None)
def test_bounded_monotone_in_m_and_b(n, m, b, extra):
    assert count_bounded(n, m, b) <= count_bounded(n, m + 1, b)
    assert count_bounded(n, m, b) <= count_bounded(n, m, b + extra)


@pytest.mark.parametrize("n,m,k1,expected", [(10, 3, 4, 2), (12, 3, 4, 1), (9, 1, 9, 1), (10, 3, 10, 1)])
def test_count_with_largest_examples(n, m, k1, expected):
    assert count_with_largest(n, m, k1) == expected


@pytest.mark.parametrize("k1", [3, 11])
def test_count_with_largest_rejects_impossible(k1):
    with pytest.raises(ValueError):
        count_with_largest(10, 3, k1)


def test_largest_part_strata_sum_to_total():
    for n in range(1, 60):
        for m in range(1, 8):
            lo = ceil_div(n, m)
            total = sum(count_with_largest(n, m, k) for k in range(lo, n + 1))
            assert total == count_at_most(n, m)


def test_fixed_largest_identity_small_sweep():
    for n in range(1, 120):
        for m in range(2, 7):
            if m > n:
                continue
            cut = identity_cutoff(n, m)
            c = ceil_div(n, m)
            for l in range(0, n - c + 1):
                got = count_with_largest(n, m, c + l)
                ref = identity_count(n, m, l)
                if l <= cut:
                    assert got == ref, (n, m, l)
                else:
                    assert got <= ref, (n, m, l)


@given(st.integers(1, 10 ** 6), st.integers(1, 500))
def test_residue_in_range(n, m):
    j = residue_j(n, m)
    assert 1 <= j <= m
    assert (n - j) % m == 0


@pytest.mark.parametrize("n,m", [(n, m) for n in (10, 37, 120, 200) for m in (1, 3, 6, 10)])
def test_distinct_parts_bijection(n, m):
    strict = [p for p in brute_partitions(n, m) if len(p) == m and len(set(p)) == m] if n <= 60 else None
    if strict is not None:
        assert count_distinct(n, m) == len(strict)
    # exactly m distinct parts <-> subtract the staircase
    rest = n - m * (m + 1) // 2
    assert count_distinct(n, m) == (count_at_most(rest, m) if rest >= 0 else 0)


def test_distinct_parts_bijection_by_enumeration():
    for n in range(0, 45):
        for m in range(1, 8):
            strict = sum(1 for p in brute_partitions(n, m) if len(p) == m and len(set(p)) == m)
            assert count_distinct(n, m) == strict


@pytest.mark.parametrize("n,m,expected", [(5, 1, 0.0), (100, 3, math.log(4851 / 6)), (5, 2, math.log(2))])
def test_erdos_lehner(n, m, expected):
    assert erdos_lehner_log_estimate(n, m) == pytest.approx(expected, abs=1e-12)


def test_erdos_lehner_value_pinned():
    # log(808.5) = 6.69518...
    assert erdos_lehner_log_estimate(100, 3) == pytest.approx(6.695181, abs=1e-6)


@pytest.mark.parametrize("N", [1, 2, 10, 100, 400, 1000, 5000])
def test_hr_bound_dominates(N):
    assert log_int(count_at_most(N, N)) <= hr_log_upper_bound(N)


def test_hr_bound_values():
    assert hr_log_upper_bound(1) == pytest.approx(2.5651, abs=1e-4)
    assert hr_log_upper_bound(100) == pytest.approx(25.651, abs=1e-3)
    assert math.log(190569292) == pytest.approx(19.066, abs=1e-3)
    with pytest.raises(ValueError):
        hr_log_upper_bound(0)


@given(st.integers(1, 2 ** 4000))
def test_log_int(x):
    assert log_int(x) == pytest.approx(math.log(x) if x < 2 ** 1000 else math.log2(x) * math.log(2), rel=1e-14)


def test_partition_validation():
    p = Partition((4, 3, 3), 10, 3)
    assert p.largest == 4 and p.padded() == (4, 3, 3)
    assert Partition((5,), 5, 3).padded() == (5, 0, 0)
    for bad in [((3, 4), 7, 2), ((4, 3), 8, 2), ((1, 1, 1), 3, 2), ((2, 0), 2, 2)]:
        with pytest.raises(ValueError):
            Partition(*bad)


def test_frozen_cache_is_read_only():
    cache = CountCache()
    assert cache.at_most(30, 5) == count_at_most(30, 5)
    assert cache.bounded(20, 4, 6) == count_bounded(20, 4, 6)
    cache.freeze()
    assert cache.at_most(30, 5) == count_at_most(30, 5)
    assert cache.bounded(20, 4, 6) == count_bounded(20, 4, 6)
    with pytest.raises(counting.CacheFrozenError):
        cache.at_most(100, 7)


def test_cache_persistence_roundtrip(tmp_path):
    a = CountCache(tmp_path)
    row = list(a.row(6, 300))
    files = sorted(p.name for p in tmp_path.iterdir())
    assert "atmost_m6.bin" in files
    m, stored = counting.read_segment(tmp_path / "atmost_m6.bin")
    assert m == 6 and stored[: len(row)] == row[: len(stored)]
    b = CountCache(tmp_path)
    assert b.at_most(300, 6) == row[300]
    raw = (tmp_path / "atmost_m6.bin").read_bytes()
    assert raw[:4] == b"PLCS"


def test_segment_rejects_garbage(tmp_path):
    path = tmp_path / "x.bin"
    path.write_bytes(b"nope")
    with pytest.raises(ValueError):
        counting.read_segment(path)


def test_large_row_grows_lazily():
    cache = CountCache()
    small = cache.row(4, 50)
    big = cache.row(4, 5000)
    assert big[:51] == small[:51]
    assert big[5000] == count_at_most(5000, 4)
    assert np.all(np.diff([float(x) for x in big[:2000]]) >= 0)
