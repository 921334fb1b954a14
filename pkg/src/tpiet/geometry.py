"""Minimal planar geometry: points, linestrings and single-ring polygons.

Topological predicates are computed by locating a finite set of witness
points (vertices, segment intersections, midpoints of split segments and,
for polygons, points nudged off each boundary piece) against both operands.
Inside a single boundary piece the location relative to the other geometry
cannot change, so the witnesses are enough to decide the predicates.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import GeometryError, WKTSyntaxError

__all__ = [
    "EPS", "Geometry", "point", "linestring", "polygon",
    "parse_wkt", "to_wkt",
    "intersects", "contains", "crosses", "touches", "distance", "area",
    "SPATIAL_PREDICATES",
]

#: Tolerance for on-boundary classification.
EPS = 1e-9

POINT, LINESTRING, POLYGON = "point", "linestring", "polygon"
_DIM = {POINT: 0, LINESTRING: 1, POLYGON: 2}

Coord = tuple[float, float]


@dataclass(frozen=True)
class Geometry:
    """A point, linestring, or polygon. Polygon rings are stored closed."""

    kind: str
    coords: tuple[Coord, ...]

    def __post_init__(self):
        _validate(self.kind, self.coords)

    @property
    def dim(self) -> int:
        return _DIM[self.kind]

    @property
    def segments(self) -> list[tuple[Coord, Coord]]:
        c = self.coords
        if self.kind == POINT:
            return [(c[0], c[0])]
        return [(c[i], c[i + 1]) for i in range(len(c) - 1)]

    @property
    def vertices(self) -> tuple[Coord, ...]:
        if self.kind == POLYGON:
            return self.coords[:-1]
        return self.coords

    def translate(self, dx: float, dy: float) -> "Geometry":
        return Geometry(self.kind, tuple((x + dx, y + dy) for x, y in self.coords))

    def scale(self, k: float) -> "Geometry":
        return Geometry(self.kind, tuple((x * k, y * k) for x, y in self.coords))

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [x for x, _ in self.coords]
        ys = [y for _, y in self.coords]
        return min(xs), min(ys), max(xs), max(ys)

    def __str__(self):
        return to_wkt(self)


def point(x: float, y: float) -> Geometry:
    return Geometry(POINT, ((float(x), float(y)),))


def linestring(coords: Iterable[Sequence[float]]) -> Geometry:
    return Geometry(LINESTRING, tuple((float(x), float(y)) for x, y in coords))


def polygon(coords: Iterable[Sequence[float]]) -> Geometry:
    """Build a polygon; the ring is closed automatically if needed."""
    ring = [(float(x), float(y)) for x, y in coords]
    if ring and ring[0] != ring[-1]:
        ring.append(ring[0])
    return Geometry(POLYGON, tuple(ring))


def _validate(kind: str, coords: tuple[Coord, ...]) -> None:
    if kind not in _DIM:
        raise GeometryError(f"unknown geometry kind {kind!r}")
    for c in coords:
        if len(c) != 2 or not all(math.isfinite(v) for v in c):
            raise GeometryError(f"invalid coordinate {c!r}")
    if kind == POINT:
        if len(coords) != 1:
            raise GeometryError("a point has exactly one coordinate")
    elif kind == LINESTRING:
        if len(coords) < 2:
            raise GeometryError("linestring needs at least 2 vertices")
    else:
        if len(coords) < 4 or len(set(coords[:-1])) < 3:
            raise GeometryError("polygon ring too short: needs at least 3 distinct vertices")
        if coords[0] != coords[-1]:
            raise GeometryError("polygon ring is not closed")
        if abs(_signed_area(coords)) <= EPS:
            raise GeometryError("polygon ring has zero area")
        _check_simple(coords)


def _check_simple(ring: tuple[Coord, ...]) -> None:
    segs = [(ring[i], ring[i + 1]) for i in range(len(ring) - 1)]
    n = len(segs)
    for i, j in combinations(range(n), 2):
        adjacent = j == i + 1 or (i == 0 and j == n - 1)
        a, b = segs[i]
        c, d = segs[j]
        if adjacent:
            # Neighbours share one vertex; they must not fold back on each other.
            if _collinear_overlap(a, b, c, d):
                raise GeometryError("polygon ring is not simple (edges fold back)")
            continue
        if _segments_intersect(a, b, c, d):
            raise GeometryError("polygon ring is not simple (self-intersection)")


# ----------------------------------------------------------------------------
# WKT

_WKT_TOKEN = re.compile(r"\s*(?:(?P<word>[A-Za-z]+)|(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)|(?P<punct>[(),]))")


def _tokens(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _WKT_TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise WKTSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        yield m.lastgroup, m.group(m.lastgroup), start
        pos = m.end()
    yield "eof", "", len(text)


class _WKTReader:
    def __init__(self, text: str):
        self.toks = list(_tokens(text))
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind: str, value: str | None = None):
        k, v, p = self.toks[self.i]
        if k != kind or (value is not None and v != value):
            want = value or kind
            got = v or "end of input"
            raise WKTSyntaxError(f"expected {want!r}, found {got!r}", p)
        self.i += 1
        return v

    def coord(self) -> Coord:
        x = float(self.take("num"))
        y = float(self.take("num"))
        return x, y

    def coord_list(self) -> list[Coord]:
        self.take("punct", "(")
        out = [self.coord()]
        while self.peek()[1] == ",":
            self.take("punct", ",")
            out.append(self.coord())
        self.take("punct", ")")
        return out


def parse_wkt(text: str) -> Geometry:
    """Parse POINT, LINESTRING or POLYGON well-known text (single ring)."""
    r = _WKTReader(text)
    _, word, pos = r.peek()
    tag = r.take("word").upper()
    if tag == "POINT":
        coords = r.coord_list()
        if len(coords) != 1:
            raise WKTSyntaxError("POINT takes exactly one coordinate", pos)
        kind = POINT
    elif tag == "LINESTRING":
        coords = r.coord_list()
        kind = LINESTRING
    elif tag == "POLYGON":
        r.take("punct", "(")
        coords = r.coord_list()
        if r.peek()[1] == ",":
            raise WKTSyntaxError("polygons with holes are not supported", r.peek()[2])
        r.take("punct", ")")
        kind = POLYGON
    else:
        raise WKTSyntaxError(f"unsupported geometry type {word!r}", pos)
    r.take("eof")
    try:
        return Geometry(kind, tuple(coords))
    except GeometryError as e:
        raise GeometryError(f"invalid {tag}: {e}") from None


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_wkt(g: Geometry) -> str:
    body = ",".join(f"{_fmt(x)} {_fmt(y)}" for x, y in g.coords)
    if g.kind == POINT:
        return f"POINT({body})"
    if g.kind == LINESTRING:
        return f"LINESTRING({body})"
    return f"POLYGON(({body}))"


# ----------------------------------------------------------------------------
# Segment primitives

def _cross(o: Coord, a: Coord, b: Coord) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(p: Coord, a: Coord, b: Coord, eps: float = EPS) -> bool:
    return _point_segment_distance(p, a, b) <= eps


def _point_segment_distance(p: Coord, a: Coord, b: Coord) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def _segments_intersect(a: Coord, b: Coord, c: Coord, d: Coord) -> bool:
    d1 = _cross(c, d, a)
    d2 = _cross(c, d, b)
    d3 = _cross(a, b, c)
    d4 = _cross(a, b, d)
    if ((d1 > EPS and d2 < -EPS) or (d1 < -EPS and d2 > EPS)) and (
        (d3 > EPS and d4 < -EPS) or (d3 < -EPS and d4 > EPS)
    ):
        return True
    return (
        _on_segment(a, c, d) or _on_segment(b, c, d)
        or _on_segment(c, a, b) or _on_segment(d, a, b)
    )


def _collinear_overlap(a: Coord, b: Coord, c: Coord, d: Coord) -> bool:
    """True when two segments share a stretch of positive length."""
    if abs(_cross(a, b, c)) > EPS or abs(_cross(a, b, d)) > EPS:
        return False
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return False
    t0 = ((c[0] - a[0]) * dx + (c[1] - a[1]) * dy) / L2
    t1 = ((d[0] - a[0]) * dx + (d[1] - a[1]) * dy) / L2
    lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
    return (hi - lo) * math.sqrt(L2) > EPS


def _intersection_points(a: Coord, b: Coord, c: Coord, d: Coord) -> list[Coord]:
    """Points where segments ab and cd meet (endpoints of the overlap when collinear)."""
    out = [p for p in (a, b) if _on_segment(p, c, d)]
    out += [p for p in (c, d) if _on_segment(p, a, b)]
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    den = r[0] * s[1] - r[1] * s[0]
    if abs(den) > EPS * EPS:
        qp = (c[0] - a[0], c[1] - a[1])
        t = (qp[0] * s[1] - qp[1] * s[0]) / den
        u = (qp[0] * r[1] - qp[1] * r[0]) / den
        if -EPS <= t <= 1 + EPS and -EPS <= u <= 1 + EPS:
            out.append((a[0] + t * r[0], a[1] + t * r[1]))
    return out


def _segment_distance(a: Coord, b: Coord, c: Coord, d: Coord) -> float:
    if _segments_intersect(a, b, c, d):
        return 0.0
    return min(
        _point_segment_distance(a, c, d), _point_segment_distance(b, c, d),
        _point_segment_distance(c, a, b), _point_segment_distance(d, a, b),
    )


def _signed_area(ring: Sequence[Coord]) -> float:
    s = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        s += x1 * y2 - x2 * y1
    return s / 2.0


# ----------------------------------------------------------------------------
# Point location

INTERIOR, BOUNDARY, EXTERIOR = "I", "B", "E"


def _point_in_ring(p: Coord, ring: Sequence[Coord]) -> bool:
    """Ray casting along +x; ``ring`` is closed."""
    px, py = p
    inside = False
    for (x1, y1), (x2, y2) in zip(ring, ring[1:]):
        if (y1 > py) != (y2 > py):
            xint = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
            if xint > px:
                inside = not inside
    return inside


def _is_closed_line(g: Geometry) -> bool:
    return g.kind == LINESTRING and g.coords[0] == g.coords[-1]


def locate(p: Coord, g: Geometry) -> str:
    """Classify ``p`` as interior, boundary or exterior of ``g``."""
    if g.kind == POINT:
        q = g.coords[0]
        return INTERIOR if math.hypot(p[0] - q[0], p[1] - q[1]) <= EPS else EXTERIOR
    on = any(_on_segment(p, a, b) for a, b in g.segments)
    if g.kind == LINESTRING:
        if not on:
            return EXTERIOR
        if not _is_closed_line(g):
            for end in (g.coords[0], g.coords[-1]):
                if math.hypot(p[0] - end[0], p[1] - end[1]) <= EPS:
                    return BOUNDARY
        return INTERIOR
    if on:
        return BOUNDARY
    return INTERIOR if _point_in_ring(p, g.coords) else EXTERIOR


# ----------------------------------------------------------------------------
# Witness points

def _split_points(seg: tuple[Coord, Coord], other: Geometry) -> list[Coord]:
    """Points along ``seg`` where it may change location relative to ``other``."""
    a, b = seg
    pts = [a, b]
    for c, d in other.segments:
        pts.extend(_intersection_points(a, b, c, d))
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return [a]

    def param(p):
        return ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2

    pts.sort(key=param)
    return pts


def _pieces(g: Geometry, other: Geometry):
    """Midpoints and unit normals of ``g``'s boundary pieces split against ``other``."""
    for seg in g.segments:
        pts = _split_points(seg, other)
        for p, q in zip(pts, pts[1:]):
            length = math.hypot(q[0] - p[0], q[1] - p[1])
            if length <= EPS:
                continue
            mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
            normal = (-(q[1] - p[1]) / length, (q[0] - p[0]) / length)
            yield mid, normal, length


def _witnesses(a: Geometry, b: Geometry) -> list[Coord]:
    pts: list[Coord] = list(a.vertices) + list(b.vertices)
    for s in a.segments:
        for t in b.segments:
            pts.extend(_intersection_points(s[0], s[1], t[0], t[1]))
    for g, other in ((a, b), (b, a)):
        if g.kind == POINT:
            continue
        for mid, normal, length in _pieces(g, other):
            pts.append(mid)
            if g.kind == POLYGON:
                # Nudge to either side to sample the adjacent 2D regions.
                h = min(length / 4, _nudge(a, b))
                pts.append((mid[0] + h * normal[0], mid[1] + h * normal[1]))
                pts.append((mid[0] - h * normal[0], mid[1] - h * normal[1]))
    return pts


def _nudge(a: Geometry, b: Geometry) -> float:
    xs0, ys0, xs1, ys1 = a.bounds()
    xt0, yt0, xt1, yt1 = b.bounds()
    span = max(xs1, xt1) - min(xs0, xt0) + max(ys1, yt1) - min(ys0, yt0)
    return max(span, 1.0) * 1e-6


def _relate(a: Geometry, b: Geometry) -> set[tuple[str, str]]:
    """Set of (location in a, location in b) pairs realised by witness points."""
    return {(locate(p, a), locate(p, b)) for p in _witnesses(a, b)}


# ----------------------------------------------------------------------------
# Predicates and measures

def intersects(a: Geometry, b: Geometry) -> bool:
    return any(la != EXTERIOR and lb != EXTERIOR for la, lb in _relate(a, b))


def contains(a: Geometry, b: Geometry) -> bool:
    """True when every point of ``b`` lies in ``a`` (boundary included)."""
    if b.dim > a.dim:
        return False
    pts = list(b.vertices)
    if b.kind != POINT:
        pts += [mid for mid, _, _ in _pieces(b, a)]
    return all(locate(p, a) != EXTERIOR for p in pts)


def crosses(a: Geometry, b: Geometry) -> bool:
    """Line/polygon: the line runs through both the interior and the exterior
    of the polygon. Line/line: the interiors meet in isolated points only.
    Every other kind pairing is False."""
    kinds = {a.kind, b.kind}
    if POINT in kinds or LINESTRING not in kinds:
        return False
    if a.kind == POLYGON:
        a, b = b, a
    rel = _relate(a, b)
    if b.kind == POLYGON:
        return (INTERIOR, INTERIOR) in rel and (INTERIOR, EXTERIOR) in rel
    overlap = any(
        locate(mid, b) != EXTERIOR for mid, _, _ in _pieces(a, b)
    )
    return not overlap and (INTERIOR, INTERIOR) in rel


def touches(a: Geometry, b: Geometry) -> bool:
    """The geometries meet but their interiors do not."""
    rel = _relate(a, b)
    meet = any(la != EXTERIOR and lb != EXTERIOR for la, lb in rel)
    return meet and (INTERIOR, INTERIOR) not in rel


def distance(a: Geometry, b: Geometry) -> float:
    """Minimum Euclidean distance; 0 when the geometries intersect."""
    if intersects(a, b):
        return 0.0
    return min(
        _segment_distance(s[0], s[1], t[0], t[1])
        for s in a.segments for t in b.segments
    )


def area(g: Geometry) -> float:
    if g.kind != POLYGON:
        raise GeometryError(f"area is defined for polygons, not {g.kind}")
    return abs(_signed_area(g.coords))


SPATIAL_PREDICATES = {
    "intersects": intersects,
    "contains": contains,
    "crosses": crosses,
    "touches": touches,
}
