"""
Interval Covering Module
Geometric covering (GC) and compact geometric covering (CGC) interval systems,
their marker-indexed counterparts (PGC / CPGC), and greedy consecutive covers
"""

import math
from dataclasses import dataclass, field
from typing import List

from src.utils.errors import ContractViolation


@dataclass(frozen=True, order=True)
class Interval:
    """Closed integer range [start, end], in rounds or marker indices"""
    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise ContractViolation(f"interval start {self.start} exceeds end {self.end}")

    def __len__(self) -> int:
        return self.end - self.start + 1

    def __contains__(self, t: int) -> bool:
        return self.start <= t <= self.end

    def __str__(self) -> str:
        return f"{self.start}..{self.end}"


@dataclass
class CoverSequence:
    """Consecutive intervals I_1..I_v covering the query [left, right]"""
    left: int
    right: int
    intervals: List[Interval] = field(default_factory=list)

    @property
    def v(self) -> int:
        return len(self.intervals)

    @property
    def overshoot(self) -> int:
        """Rounds past `right` covered by the last (untruncated) interval"""
        return self.intervals[-1].end - self.right if self.intervals else 0

    def is_valid(self) -> bool:
        if not self.intervals or self.intervals[0].start != self.left:
            return False
        for previous, current in zip(self.intervals, self.intervals[1:]):
            if current.start != previous.end + 1:
                return False
        if self.intervals[-1].end < self.right:
            return False
        return self.v == 1 or self.intervals[-2].end < self.right


def two_adic_valuation(t: int) -> int:
    """Exponent k of the largest power of two dividing t"""
    return (t & -t).bit_length() - 1


def cover_length_bound(left: int, right: int) -> int:
    """⌈log₂(right − left + 2)⌉"""
    return math.ceil(math.log2(right - left + 2))


def cgc_interval_at(t: int) -> Interval:
    """The unique CGC interval starting at t: with t = i·2^k, i odd, it is [t, t + 2^k − 1]"""
    if t < 1:
        raise ContractViolation(f"rounds start at 1, got {t}")
    return Interval(t, t + (1 << two_adic_valuation(t)) - 1)


def gc_intervals_at(t: int, horizon: int) -> List[Interval]:
    """All GC intervals [i·2^k, (i+1)·2^k − 1] starting at t, truncated at the horizon"""
    if not 1 <= t <= horizon:
        raise ContractViolation(f"round {t} outside [1, {horizon}]")
    return [
        Interval(t, min(t + (1 << k) - 1, horizon))
        for k in range(two_adic_valuation(t) + 1)
    ]


def cgc_end_index(m: int) -> int:
    """g = (i+1)·2^k for m = i·2^k with i odd, so that [m, g − 1] is a CGC interval"""
    if m < 1:
        raise ContractViolation(f"marker indices start at 1, got {m}")
    return m + (1 << two_adic_valuation(m))


def _greedy_cover(left: int, right: int) -> CoverSequence:
    if left < 1:
        raise ContractViolation(f"cover must start at 1 or later, got {left}")
    if left > right:
        raise ContractViolation(f"empty query [{left}, {right}]")
    cover = CoverSequence(left, right)
    start = left
    while True:
        interval = cgc_interval_at(start)
        cover.intervals.append(interval)
        if interval.end >= right:
            return cover
        start = interval.end + 1


def cgc_cover(r: int, s: int) -> CoverSequence:
    """Greedy chain of CGC intervals starting at r and reaching s; v ≤ ⌈log₂(s − r + 2)⌉"""
    return _greedy_cover(r, s)


def marker_cover(p: int, q: int) -> CoverSequence:
    """Same greedy chain in marker-index space (CPGC structure over indices)"""
    return _greedy_cover(p, q)


def pgc_intervals_at_marker(index: int, marker_count: int) -> List[Interval]:
    """PGC index intervals [i·2^k, (i+1)·2^k − 1] starting at marker `index`,
    truncated at the last realised marker index"""
    return gc_intervals_at(index, marker_count)


def cpgc_interval_at_marker(index: int) -> Interval:
    """CPGC interval over marker indices starting at `index`"""
    return cgc_interval_at(index)


def cgc_active_count(t: int) -> int:
    """Number of CGC intervals containing round t, i.e. SACS's active-set size at t

    Round t lies in the level-k block t >> k, which is a CGC interval exactly
    when that block index is odd, so the count is the number of set bits of t.
    """
    if t < 1:
        raise ContractViolation(f"rounds start at 1, got {t}")
    return bin(t).count('1')
