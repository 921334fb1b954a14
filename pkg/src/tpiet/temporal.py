"""Discrete valid-time domain: instants, closed intervals, the interval
predicates used in query conditions, and coalescing.

Instants are non-negative integer ticks or the sentinel :data:`NOW`, which
compares greater than every finite tick. Intervals are closed on both ends.
"""
from __future__ import annotations

import datetime as _dt
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterable, Optional, Union

from .errors import IntervalError

__all__ = [
    "NOW", "Instant", "Interval", "TemporalRow",
    "parse_instant", "resolve", "iintersection",
    "at", "starts_before", "finishes_after", "begins_after",
    "before", "after", "during", "overlaps", "covers", "meets",
    "coalesce", "coalesce_intervals", "INSTANT_PREDICATES", "INTERVAL_PREDICATES", "TimeConfig",
]


class _NowType:
    """The moving current instant. Greater than any finite tick."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Now"

    __str__ = __repr__

    def __reduce__(self):
        return (_NowType, ())

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __hash__(self):
        return hash("tpiet.Now")

    def __eq__(self, other):
        return other is self

    def __ne__(self, other):
        return other is not self

    def __lt__(self, other):
        if other is self or isinstance(other, int):
            return False
        return NotImplemented

    def __le__(self, other):
        if other is self:
            return True
        if isinstance(other, int):
            return False
        return NotImplemented

    def __gt__(self, other):
        if other is self:
            return False
        if isinstance(other, int):
            return True
        return NotImplemented

    def __ge__(self, other):
        if other is self or isinstance(other, int):
            return True
        return NotImplemented

    def __add__(self, other):
        # Now + k stays Now; only used for adjacency tests.
        if isinstance(other, int):
            return self
        return NotImplemented

    __radd__ = __add__


NOW = _NowType()

Instant = Union[int, _NowType]


def _check_tick(t) -> None:
    if t is NOW:
        return
    if isinstance(t, bool) or not isinstance(t, int):
        raise IntervalError(f"instant must be an integer tick or Now, got {t!r}")
    if t < 0:
        raise IntervalError(f"instant must be non-negative, got {t}")


def parse_instant(text: str) -> Instant:
    """Parse a bare tick or the keyword ``Now`` (any case)."""
    s = text.strip()
    if s.lower() == "now":
        return NOW
    try:
        t = int(s)
    except ValueError:
        raise IntervalError(f"not an instant: {text!r}") from None
    _check_tick(t)
    return t


def resolve(t: Instant, current_tick: int) -> int:
    """Materialize ``Now`` to the evaluation tick."""
    return current_tick if t is NOW else t


@dataclass(frozen=True, order=False)
class Interval:
    """Closed valid-time span ``[start, end]``; ``end`` may be :data:`NOW`."""

    start: int
    end: Instant

    def __post_init__(self):
        if self.start is NOW:
            raise IntervalError("interval start must be finite")
        _check_tick(self.start)
        _check_tick(self.end)
        if self.start > self.end:
            raise IntervalError(f"interval start {self.start} exceeds end {self.end}")

    @property
    def live(self) -> bool:
        return self.end is NOW

    def contains(self, t: Instant) -> bool:
        return self.start <= t <= self.end

    def ticks(self, current_tick: int) -> range:
        return range(self.start, resolve(self.end, current_tick) + 1)

    def sort_key(self):
        return (self.start, float("inf") if self.end is NOW else self.end)

    def __repr__(self):
        return f"[{self.start},{self.end}]"

    def __iter__(self):
        yield self.start
        yield self.end


def iintersection(i1: Interval, i2: Interval) -> Optional[Interval]:
    """Common part of two closed intervals, or ``None`` if they share no tick."""
    lo = max(i1.start, i2.start)
    hi = min(i1.end, i2.end)
    if lo > hi:
        return None
    return Interval(lo, hi)


# Instant predicates. ``i`` is the object's interval, ``t`` a finite tick.

def at(i: Interval, t: Instant) -> bool:
    return i.start <= t <= i.end


def starts_before(i: Interval, t: Instant) -> bool:
    return t > i.start


def finishes_after(i: Interval, t: Instant) -> bool:
    return t < i.end


def begins_after(i: Interval, t: Instant) -> bool:
    return t < i.start


# Window predicates. ``i`` is the object's interval, ``w`` the window [t1, t2].
# Strictness follows the published definitions exactly.

def before(i: Interval, w: Interval) -> bool:
    return i.end < w.start


def after(i: Interval, w: Interval) -> bool:
    return w.end < i.start


def during(i: Interval, w: Interval) -> bool:
    return w.start <= i.start and w.end >= i.end


def overlaps(i: Interval, w: Interval) -> bool:
    t1, t2 = w.start, w.end
    return (t1 < i.start and t2 > i.start and t2 < i.end) or (
        t1 > i.start and t2 > i.end and t1 < i.end
    )


def covers(i: Interval, w: Interval) -> bool:
    return w.start >= i.start and w.end <= i.end


def meets(i: Interval, w: Interval) -> bool:
    return w.start == i.end or w.end == i.start


INSTANT_PREDICATES = {
    "at": at,
    "startsbefore": starts_before,
    "finishesafter": finishes_after,
    "beginsafter": begins_after,
}

INTERVAL_PREDICATES = {
    "before": before,
    "after": after,
    "during": during,
    "overlaps": overlaps,
    "covers": covers,
    "meets": meets,
}


@dataclass(frozen=True)
class TemporalRow:
    key: tuple
    interval: Interval


def coalesce_intervals(intervals: Iterable[Interval]) -> list[Interval]:
    """Merge overlapping, touching or adjacent (``a.end + 1 == b.start``)
    intervals into maximal ones, sorted by start."""
    out: list[Interval] = []
    for iv in sorted(intervals, key=Interval.sort_key):
        if out and iv.start <= out[-1].end + 1:
            last = out[-1]
            if iv.end > last.end:
                out[-1] = Interval(last.start, iv.end)
        else:
            out.append(iv)
    return out


def coalesce(rows: Iterable[TemporalRow]) -> list[TemporalRow]:
    """Coalesce value-equivalent rows into maximal intervals.

    The result is sorted deterministically so that equal inputs (in any
    order) give identical lists.
    """
    groups: dict[Hashable, list[Interval]] = defaultdict(list)
    arity = None
    for row in rows:
        if arity is None:
            arity = len(row.key)
        elif len(row.key) != arity:
            raise IntervalError("coalesce requires rows of equal arity")
        groups[row.key].append(row.interval)
    out = [
        TemporalRow(key, iv)
        for key, ivs in groups.items()
        for iv in coalesce_intervals(ivs)
    ]
    out.sort(key=lambda r: (repr(r.key), r.interval.sort_key()))
    return out


@dataclass(frozen=True)
class TimeConfig:
    """Maps calendar dates and year labels onto ticks.

    With ``granularity="day"`` a tick is a day offset from ``epoch`` (a
    :class:`datetime.date`); with ``"year"`` it is a year offset from
    ``epoch`` (an ``int`` year, or a date whose year is used).
    """

    granularity: str = "year"
    epoch: object = 0
    current_tick: int = 0

    def __post_init__(self):
        if self.granularity not in ("day", "year"):
            raise IntervalError(f"granularity must be day or year, not {self.granularity!r}")
        _check_tick(self.current_tick)

    @property
    def _epoch_year(self) -> int:
        return self.epoch if isinstance(self.epoch, int) else self.epoch.year

    def date_to_tick(self, year: int, month: int = 1, day: int = 1) -> int:
        if self.granularity == "year":
            tick = year - self._epoch_year
        else:
            epoch = self.epoch if isinstance(self.epoch, _dt.date) else _dt.date(self.epoch, 1, 1)
            tick = (_dt.date(year, month, day) - epoch).days
        if tick < 0:
            raise IntervalError(f"date {month}/{day}/{year} precedes the epoch")
        return tick

    def year_interval(self, year: int) -> Interval:
        return Interval(self.date_to_tick(year, 1, 1), self.date_to_tick(year, 12, 31))

    def member_interval(self, label: str) -> Optional[Interval]:
        """Tick range of a Time-dimension member labelled by a year."""
        s = str(label).strip()
        if s.isdigit() and len(s) == 4:
            try:
                return self.year_interval(int(s))
            except IntervalError:
                return None
        return None
