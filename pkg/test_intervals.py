#!/usr/bin/env python3
"""
Tests for the GC / CGC / PGC / CPGC interval systems, greedy covers and diagrams
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.intervals.covering import (
    Interval, cgc_active_count, cgc_cover, cgc_end_index, cgc_interval_at, cover_length_bound,
    cpgc_interval_at_marker, gc_intervals_at, marker_cover,
    pgc_intervals_at_marker, two_adic_valuation,
)
from src.intervals.diagram import format_cover, level_intervals, render_intervals
from src.utils.errors import ContractViolation


@pytest.mark.parametrize('t, expected', [
    (1, (1, 1)), (2, (2, 3)), (3, (3, 3)), (4, (4, 7)), (6, (6, 7)), (8, (8, 15)), (12, (12, 15)),
])
def test_cgc_interval_at(t, expected):
    assert cgc_interval_at(t) == Interval(*expected)


def test_two_adic_valuation():
    assert [two_adic_valuation(t) for t in (1, 2, 3, 4, 12, 40, 1024)] == [0, 1, 0, 2, 2, 3, 10]


def test_rounds_start_at_one():
    with pytest.raises(ContractViolation):
        cgc_interval_at(0)
    with pytest.raises(ContractViolation):
        cgc_cover(7, 3)


def test_gc_intervals_at_are_truncated_at_horizon():
    assert gc_intervals_at(4, 16) == [Interval(4, 4), Interval(4, 5), Interval(4, 7)]
    truncated = gc_intervals_at(8, 10)
    assert len(truncated) == 4
    assert all(interval.end <= 10 for interval in truncated)


def test_consecutive_cgc_intervals_at_least_double():
    for t in range(1, 2 ** 12 + 1):
        current = cgc_interval_at(t)
        following = cgc_interval_at(current.end + 1)
        assert len(following) >= 2 * len(current)


def test_cover_example():
    cover = cgc_cover(5, 23)
    assert [(i.start, i.end) for i in cover.intervals] == [(5, 5), (6, 7), (8, 15), (16, 31)]
    assert cover.v == 4
    assert cover.overshoot == 8
    assert cover_length_bound(5, 23) == 5
    assert format_cover(cover) == "5..5, 6..7, 8..15, 16..31  v=4 ≤ 5"


def test_cover_of_single_round():
    cover = cgc_cover(1, 1)
    assert cover.v == 1 and cover.is_valid()


def test_every_cover_up_to_256():
    for r in range(1, 257):
        for s in range(r, 257):
            cover = cgc_cover(r, s)
            assert cover.is_valid()
            assert cover.v <= math.ceil(math.log2(s - r + 2))


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=1, max_value=10 ** 6), st.integers(min_value=0, max_value=10 ** 6))
def test_cover_invariants_on_random_queries(r, length):
    cover = cgc_cover(r, r + length)
    assert cover.is_valid()
    assert cover.v <= cover_length_bound(r, r + length)
    assert all(interval == cgc_interval_at(interval.start) for interval in cover.intervals)


def test_active_count_matches_brute_force():
    for t in range(1, 257):
        containing = sum(1 for u in range(1, t + 1) if cgc_interval_at(u).end >= t)
        assert cgc_active_count(t) == containing


def test_cgc_matches_naive_level_enumeration():
    horizon = 2 ** 12
    starts = {}
    membership = [0] * (horizon + 2)
    for k in range(13):
        for i in range(1, horizon // 2 ** k + 1, 2):
            left, right = i * 2 ** k, (i + 1) * 2 ** k - 1
            starts.setdefault(left, []).append(Interval(left, right))
            membership[left] += 1
            membership[min(right, horizon) + 1] -= 1
    assert sorted(starts) == list(range(1, horizon + 1))
    count = 0
    for t in range(1, horizon + 1):
        assert starts[t] == [cgc_interval_at(t)]
        count += membership[t]
        assert count == cgc_active_count(t)


def test_end_index_closes_the_cgc_interval():
    assert [cgc_end_index(m) for m in (1, 2, 3, 4, 6, 8)] == [2, 4, 4, 8, 8, 16]
    for m in range(1, 200):
        assert cgc_end_index(m) - 1 == cgc_interval_at(m).end


def test_marker_index_intervals():
    assert cpgc_interval_at_marker(4) == Interval(4, 7)
    assert pgc_intervals_at_marker(2, 8) == [Interval(2, 2), Interval(2, 3)]
    assert marker_cover(3, 6).v == cgc_cover(3, 6).v


def test_level_intervals_compact_keeps_odd_multiples():
    levels = level_intervals('cgc', 8)
    assert levels[0] == [Interval(1, 1), Interval(3, 3), Interval(5, 5), Interval(7, 7)]
    assert levels[1] == [Interval(2, 3), Interval(6, 7)]
    assert levels[2] == [Interval(4, 7)]
    assert levels[3] == [Interval(8, 15)]
    assert len(level_intervals('gc', 8)[0]) == 8


def test_cgc_diagram_horizon_8():
    lines = render_intervals('cgc', 8).split('\n')
    assert lines[0] == 't   ' + ''.join(str(t).rjust(3) for t in range(1, 9))
    assert lines[1] == 'C0  [ ]   [ ]   [ ]   [ ]'
    assert lines[2] == 'C1  ' + ' ' * 3 + '[----]' + ' ' * 6 + '[----]'
    assert lines[3] == 'C2  ' + ' ' * 9 + '[----------]'
    assert lines[4] == 'C3  ' + ' ' * 21 + '[->'


def test_gc_diagram_horizon_4():
    lines = render_intervals('gc', 4).split('\n')
    assert lines[1] == 'I0  [ ][ ][ ][ ]'
    assert lines[2] == 'I1  ' + ' ' * 3 + '[----][->'
    assert lines[3] == 'I2  ' + ' ' * 9 + '[->'


def test_marker_diagram_lists_marker_rounds():
    lines = render_intervals('cpgc', 4, markers=[1, 12, 30, 51]).split('\n')
    assert lines[0].startswith('i')
    assert lines[1].split() == ['s_i', '1', '12', '30', '51']
    assert lines[2].startswith('~C0')
