from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from tpiet import geometry as geo
from tpiet.errors import GeometryError, WKTSyntaxError

import oracles


def square(x0, y0, x1, y1):
    return geo.polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


# -- WKT ------------------------------------------------------------------------

def test_parse_point_and_square():
    assert geo.parse_wkt("POINT(1 2)") == geo.point(1, 2)
    sq = geo.parse_wkt("POLYGON((0 0,4 0,4 4,0 4,0 0))")
    assert len(sq.vertices) == 4
    assert geo.parse_wkt("polygon((0 0, 4 0, 4 4, 0 4, 0 0))") == sq


def test_short_ring_is_rejected():
    with pytest.raises(GeometryError, match="too short"):
        geo.parse_wkt("POLYGON((0 0,1 1))")


@pytest.mark.parametrize("text", [
    "POLYGON((0 0,4 0,4 4,0 4))",          # not closed
    "POLYGON((0 0,4 4,4 0,0 4,0 0))",      # bow tie
    "LINESTRING(1 1)",
    "POINT(1 2, 3 4)",
])
def test_invalid_geometries_are_rejected(text):
    with pytest.raises(GeometryError):
        geo.parse_wkt(text)


def test_syntax_errors_report_position():
    with pytest.raises(WKTSyntaxError) as e:
        geo.parse_wkt("POINT(1 x)")
    assert e.value.position == 8
    with pytest.raises(WKTSyntaxError):
        geo.parse_wkt("CIRCLE(0 0, 1)")
    with pytest.raises(WKTSyntaxError, match="holes"):
        geo.parse_wkt("POLYGON((0 0,4 0,4 4,0 0),(1 1,2 1,2 2,1 1))")


@pytest.mark.parametrize("text", [
    "POINT(1 2)", "POINT(-0.5 3.25)", "LINESTRING(-5 5,25 5)", "POLYGON((0 0,4 0,4 4,0 4,0 0))",
])
def test_wkt_round_trip(text):
    g = geo.parse_wkt(text)
    assert geo.to_wkt(g) == text
    assert geo.parse_wkt(geo.to_wkt(g)) == g


# -- predicates -------------------------------------------------------------------

def test_spec_predicate_examples():
    sq = square(0, 0, 4, 4)
    assert geo.contains(sq, geo.point(2, 2))
    assert geo.crosses(geo.linestring([(-1, 2), (5, 2)]), sq)
    assert geo.touches(square(0, 0, 2, 2), square(2, 0, 4, 2))


SQ = square(0, 0, 4, 4)
PAIRS = {
    "point inside": (SQ, geo.point(2, 2)),
    "point on edge": (SQ, geo.point(4, 2)),
    "point outside": (SQ, geo.point(6, 2)),
    "point at vertex": (SQ, geo.point(0, 0)),
    "line through": (geo.linestring([(-1, 2), (5, 2)]), SQ),
    "line inside": (SQ, geo.linestring([(1, 1), (3, 3)])),
    "line on edge": (geo.linestring([(0, 0), (4, 0)]), SQ),
    "line ending on edge": (geo.linestring([(-2, 2), (0, 2)]), SQ),
    "line entering": (geo.linestring([(-2, 2), (2, 2)]), SQ),
    "line apart": (geo.linestring([(5, 0), (5, 4)]), SQ),
    "line along outside edge": (geo.linestring([(-1, 0), (5, 0)]), SQ),
    "shared edge": (square(0, 0, 2, 2), square(2, 0, 4, 2)),
    "corner touch": (square(0, 0, 2, 2), square(2, 2, 4, 4)),
    "overlapping squares": (square(0, 0, 3, 3), square(2, 2, 5, 5)),
    "nested squares": (SQ, square(1, 1, 3, 3)),
    "identical squares": (SQ, square(0, 0, 4, 4)),
    "disjoint squares": (square(0, 0, 1, 1), square(3, 3, 4, 4)),
    "triangle in square": (SQ, geo.polygon([(0, 0), (4, 0), (0, 4)])),
    "crossing lines": (geo.linestring([(0, 0), (4, 4)]), geo.linestring([(0, 4), (4, 0)])),
    "collinear overlapping lines": (geo.linestring([(0, 0), (3, 0)]), geo.linestring([(2, 0), (5, 0)])),
    "lines end to end": (geo.linestring([(0, 0), (2, 0)]), geo.linestring([(2, 0), (2, 3)])),
    "T junction": (geo.linestring([(0, 0), (4, 0)]), geo.linestring([(2, 0), (2, 3)])),
    "parallel lines": (geo.linestring([(0, 0), (4, 0)]), geo.linestring([(0, 1), (4, 1)])),
    "equal points": (geo.point(1, 1), geo.point(1, 1)),
    "distinct points": (geo.point(1, 1), geo.point(2, 1)),
    "point on line": (geo.linestring([(0, 0), (4, 0)]), geo.point(1, 0)),
    "point at line end": (geo.linestring([(0, 0), (4, 0)]), geo.point(4, 0)),
}


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_predicates_agree_with_sampling_oracle(name):
    a, b = PAIRS[name]
    want = oracles.oracle_predicates(a, b)
    got = {p: geo.SPATIAL_PREDICATES[p](a, b) for p in want}
    assert got == want


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_symmetric_predicates(name):
    a, b = PAIRS[name]
    assert geo.intersects(a, b) == geo.intersects(b, a)
    assert geo.touches(a, b) == geo.touches(b, a)
    assert geo.crosses(a, b) == geo.crosses(b, a)
    assert geo.distance(a, b) == pytest.approx(geo.distance(b, a), abs=1e-12)


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_zero_distance_iff_intersects(name):
    a, b = PAIRS[name]
    assert (geo.distance(a, b) <= 1e-9) == geo.intersects(a, b)


def test_mutual_containment_means_equal_point_sets():
    a, b = SQ, geo.polygon([(0, 0), (2, 0), (4, 0), (4, 4), (0, 4)])
    assert geo.contains(a, b) and geo.contains(b, a)
    assert geo.area(a) == geo.area(b)


def test_crosses_is_false_for_polygon_pairs_and_points():
    assert not geo.crosses(square(0, 0, 3, 3), square(2, 2, 5, 5))
    assert not geo.crosses(geo.point(2, 2), SQ)


# -- metrics ----------------------------------------------------------------------

def test_distance_examples():
    assert geo.distance(geo.point(0, 0), geo.point(3, 4)) == 5.0
    assert geo.distance(geo.point(6, 2), SQ) == pytest.approx(2.0)
    assert geo.area(square(0, 0, 1, 1)) == 1.0


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_distance_agrees_with_sampling(name):
    a, b = PAIRS[name]
    assert geo.distance(a, b) == pytest.approx(oracles.oracle_distance(a, b), abs=0.03)


def test_distance_to_rotated_triangle():
    tri = geo.polygon([(0, 0), (4, 1), (1, 5)])
    p = geo.point(5, 5)
    assert geo.distance(p, tri) == pytest.approx(oracles.oracle_distance(p, tri, 0.005), abs=0.01)


def test_area_rejects_points_and_lines():
    with pytest.raises(GeometryError):
        geo.area(geo.point(0, 0))
    with pytest.raises(GeometryError):
        geo.area(geo.linestring([(0, 0), (1, 1)]))


coord = st.integers(-50, 50)


@given(coord, coord, st.integers(1, 9), st.integers(1, 9), coord, coord)
def test_area_translation_invariant(x, y, w, h, dx, dy):
    g = geo.polygon([(x, y), (x + w, y), (x, y + h)])
    assert math.isclose(geo.area(g.translate(dx, dy)), geo.area(g), rel_tol=1e-9)


@given(coord, coord, st.integers(1, 9), st.integers(1, 9), st.floats(0.1, 20))
def test_area_scales_quadratically(x, y, w, h, k):
    g = geo.polygon([(x, y), (x + w, y), (x + w, y + h), (x, y + h)])
    assert math.isclose(geo.area(g.scale(k)), k * k * geo.area(g), rel_tol=1e-9)
