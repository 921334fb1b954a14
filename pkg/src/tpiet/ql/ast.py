"""Typed syntax tree for TPiet-QL queries.

All nodes are frozen dataclasses so trees compare by value; the printer
and parser round-trip through these types.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

# -- literals and expressions -------------------------------------------------


@dataclass(frozen=True)
class Number:
    value: Union[int, float]


@dataclass(frozen=True)
class String:
    value: str


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class NowLit:
    pass


@dataclass(frozen=True)
class DateLit:
    """Calendar date written month/day/year."""

    month: int
    day: int
    year: int


InstantLit = Union[Number, NowLit, DateLit]


@dataclass(frozen=True)
class IntervalLit:
    start: InstantLit
    end: InstantLit


@dataclass(frozen=True)
class AttrRef:
    """``alias`` alone (attr is None) or ``alias.attr``."""

    alias: str
    attr: Optional[str] = None


@dataclass(frozen=True)
class Func:
    """Scalar spatial function call: ``distance`` or ``area``."""

    name: str
    args: tuple


Expr = Union[AttrRef, Func, Number, String]

# -- conditions ---------------------------------------------------------------


@dataclass(frozen=True)
class And:
    items: tuple


@dataclass(frozen=True)
class Or:
    items: tuple


@dataclass(frozen=True)
class Not:
    item: object


@dataclass(frozen=True)
class SpatialPred:
    name: str  # intersects | contains | crosses | touches
    args: tuple  # of AttrRef


@dataclass(frozen=True)
class TemporalPred:
    name: str  # canonical lower-case name, e.g. "covers", "startsbefore"
    alias: str
    arg: Union[IntervalLit, InstantLit]


@dataclass(frozen=True)
class Compare:
    op: str  # = <> < > <= >=
    left: Expr
    right: Expr


@dataclass(frozen=True)
class InCube:
    ref: AttrRef
    query: "CubeQuery"


Condition = Union[And, Or, Not, SpatialPred, TemporalPred, Compare, InCube, Bool]

# -- GIS queries --------------------------------------------------------------


@dataclass(frozen=True)
class Source:
    layer: str
    alias: str


@dataclass(frozen=True)
class GisQuery:
    projection: tuple  # of AttrRef
    sources: tuple  # of Source
    where: Optional[Condition] = None
    modifier: Optional[str] = None  # None | "SNAPSHOT" | "CURRENT"
    overlap: bool = False


# -- cube queries -------------------------------------------------------------


@dataclass(frozen=True)
class MemberPath:
    """Dotted MDX-style path such as ``[Land].[Land parcelId]``."""

    parts: tuple


@dataclass(frozen=True)
class FilterSelect:
    """``filter(<level>.Members, <measure> <op> <value>)``."""

    level: MemberPath
    measure: MemberPath
    op: str
    value: Number


@dataclass(frozen=True)
class InGis:
    path: MemberPath
    query: GisQuery


Slicer = Union[MemberPath, InGis]


@dataclass(frozen=True)
class CubeQuery:
    select: Union[FilterSelect, tuple]  # FilterSelect or tuple of MemberPath
    cube: str
    slicers: tuple = ()
    axis: Optional[str] = None  # None | "ROWS" | "COLUMNS"
    slice: Optional[MemberPath] = None


Query = Union[GisQuery, CubeQuery]


SPATIAL_PREDICATE_NAMES = ("intersects", "contains", "crosses", "touches")
INSTANT_PREDICATE_NAMES = ("at", "startsbefore", "finishesafter", "beginsafter")
INTERVAL_PREDICATE_NAMES = ("before", "after", "during", "overlaps", "covers", "meets")
FUNCTION_NAMES = ("distance", "area")

#: Display spelling used by the printer.
DISPLAY_NAMES = {
    "intersects": "Intersects", "contains": "Contains", "crosses": "Crosses",
    "touches": "Touches", "at": "AT", "startsbefore": "StartsBefore",
    "finishesafter": "FinishesAfter", "beginsafter": "BeginsAfter",
    "before": "BEFORE", "after": "AFTER", "during": "DURING",
    "overlaps": "OVERLAPS", "covers": "COVERS", "meets": "MEETS",
    "distance": "Distance", "area": "area",
}
