"""
Bracket diagrams of interval systems, one row per level
"""

from typing import Dict, List, Optional, Sequence

from src.intervals.covering import CoverSequence, Interval, cover_length_bound

KINDS = ('gc', 'cgc', 'pgc', 'cpgc')
_ROW_PREFIX = {'gc': 'I', 'cgc': 'C', 'pgc': '~I', 'cpgc': '~C'}


def level_intervals(kind: str, horizon: int) -> Dict[int, List[Interval]]:
    """Intervals of each level k with start ≤ horizon; odd multiples only for the compact kinds"""
    if kind not in KINDS:
        raise ValueError(f"unknown interval kind {kind!r}, expected one of {KINDS}")
    compact = kind in ('cgc', 'cpgc')
    levels: Dict[int, List[Interval]] = {}
    k = 0
    while (1 << k) <= horizon:
        width = 1 << k
        step = 2 if compact else 1
        levels[k] = [
            Interval(i * width, (i + 1) * width - 1)
            for i in range(1, horizon // width + 1, step)
        ]
        k += 1
    return levels


def _row_cells(intervals: Sequence[Interval], horizon: int, width: int) -> List[str]:
    cells = [' ' * width for _ in range(horizon)]
    fill = '-' * width
    for interval in intervals:
        last = min(interval.end, horizon)
        for t in range(interval.start, last + 1):
            cells[t - 1] = fill
        if interval.start == interval.end:
            cells[interval.start - 1] = '[' + ' ' * (width - 2) + ']'
            continue
        cells[interval.start - 1] = '[' + '-' * (width - 1)
        if interval.end <= horizon:
            cells[interval.end - 1] = '-' * (width - 1) + ']'
        elif interval.start == horizon:
            cells[horizon - 1] = '[' + '-' * (width - 2) + '>'
        else:
            cells[horizon - 1] = '-' * (width - 1) + '>'
    return cells


def render_intervals(kind: str, horizon: int, markers: Optional[Sequence[int]] = None) -> str:
    """Text diagram of the interval system up to `horizon`

    For the marker kinds the columns are marker indices; when `markers` is given
    an extra header row lists the round s_i of each index.
    """
    levels = level_intervals(kind, horizon)
    width = max(3, len(str(horizon)) + 1)
    if markers is not None:
        width = max(width, len(str(max(markers[:horizon], default=0))) + 1)
    label_width = 4

    column_label = 'i' if kind in ('pgc', 'cpgc') else 't'
    lines = [column_label.ljust(label_width) + ''.join(str(t).rjust(width) for t in range(1, horizon + 1))]
    if markers is not None:
        rounds = [str(markers[i]) if i < len(markers) else '' for i in range(horizon)]
        lines.append('s_i'.ljust(label_width) + ''.join(r.rjust(width) for r in rounds))

    prefix = _ROW_PREFIX[kind]
    for k, intervals in levels.items():
        label = f"{prefix}{k}".ljust(label_width)
        lines.append(label + ''.join(_row_cells(intervals, horizon, width)).rstrip())
    return '\n'.join(lines)


def format_cover(cover: CoverSequence) -> str:
    """e.g. '5..5, 6..7, 8..15, 16..31  v=4 ≤ 5'"""
    chain = ', '.join(str(interval) for interval in cover.intervals)
    return f"{chain}  v={cover.v} ≤ {cover_length_bound(cover.left, cover.right)}"
