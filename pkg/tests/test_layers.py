from __future__ import annotations

import random
import warnings

import pytest

from tpiet import geometry as geo
from tpiet.errors import LayerError
from tpiet.layers import Layer, Stage, read_layer_csv, write_layer_csv
from tpiet.temporal import NOW, Interval, at


def square(x0, y0, x1, y1):
    return geo.polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


G = square(0, 0, 10, 10)
LEFT, RIGHT = square(0, 0, 5, 10), square(5, 0, 10, 10)


@pytest.fixture
def land():
    return Layer("Land", "polygon", ())


def ids(stages):
    return {s.object_id for s in stages}


# -- create -----------------------------------------------------------------------

def test_create_inserts_open_stage(land):
    s = land.create("p1", G, {}, 0)
    assert s == Stage("p1", G, {}, Interval(0, NOW))
    assert ids(land.snapshot(0)) == {"p1"}


def test_create_twice_fails(land):
    land.create("p1", G, {}, 0)
    with pytest.raises(LayerError, match="live stage"):
        land.create("p1", G, {}, 5)


def test_create_checks_attribute_schema():
    layer = Layer("Land", "polygon", ("landuse",))
    layer.create("p1", G, {"landuse": "crop"}, 0)
    with pytest.raises(LayerError, match="schema"):
        layer.create("p2", G, {"owner": "x"}, 0)


def test_create_checks_geometry_kind(land):
    with pytest.raises(LayerError):
        land.create("x", geo.point(1, 1), {}, 0)


# -- split ------------------------------------------------------------------------

def test_split_closes_parent_at_previous_tick(land):
    land.create("p1", G, {}, 0)
    created, event = land.split("p1", 10, [("p2", LEFT, None), ("p3", RIGHT, None)])
    assert land.history("p1")[-1].interval == Interval(0, 9)
    assert [s.interval for s in created] == [Interval(10, NOW)] * 2
    assert ids(land.snapshot(9)) == {"p1"}
    assert ids(land.snapshot(10)) == {"p2", "p3"}
    assert (event.kind, event.old_ids, event.new_ids, event.instant) == ("split", ("p1",), ("p2", "p3"), 10)


def test_split_needs_two_parts(land):
    land.create("p1", G, {}, 0)
    with pytest.raises(LayerError, match="two parts"):
        land.split("p1", 10, [("p2", G, None)])


def test_split_at_creation_instant_rejected(land):
    land.create("p1", G, {}, 5)
    with pytest.raises(LayerError):
        land.split("p1", 5, [("p2", LEFT, None), ("p3", RIGHT, None)])


def test_split_part_ids_must_be_fresh(land):
    land.create("p1", G, {}, 0)
    land.create("p9", square(20, 0, 30, 10), {}, 0)
    with pytest.raises(LayerError, match="already exists"):
        land.split("p1", 4, [("p9", LEFT, None), ("p3", RIGHT, None)])
    assert land.live_stage("p1").interval == Interval(0, NOW)


def test_split_warns_when_parts_do_not_tile(land):
    land.create("p1", G, {}, 0)
    with pytest.warns(UserWarning, match="area"):
        land.split("p1", 3, [("a", square(0, 0, 1, 1), None), ("b", square(2, 2, 3, 3), None)])


# -- merge ------------------------------------------------------------------------

def test_merge_closes_parents(land):
    land.create("p5", LEFT, {}, 0)
    land.create("p6", RIGHT, {}, 0)
    stage, event = land.merge(["p5", "p6"], 40, "p56", G)
    assert land.history("p5")[-1].interval.end == 39
    assert land.history("p6")[-1].interval.end == 39
    assert stage.interval == Interval(40, NOW)
    assert ids(land.snapshot(40)) == {"p56"}
    assert event.old_ids == ("p5", "p6")


def test_merge_needs_two_parents(land):
    land.create("p5", LEFT, {}, 0)
    with pytest.raises(LayerError, match="two parents"):
        land.merge(["p5"], 4, "x", G)


def test_merge_rejects_reused_id(land):
    land.create("p5", LEFT, {}, 0)
    land.create("p6", RIGHT, {}, 0)
    with pytest.raises(LayerError):
        land.merge(["p5", "p6"], 4, "p5", G)


# -- update / delete / reincarnate ------------------------------------------------------

def test_update_keeps_identity():
    airports = Layer("Airports", "point", ("name",))
    g1, g2 = geo.point(-10, 5), geo.point(-5, 25)
    airports.create("a1", g1, {"name": "Laguna"}, 0)
    _, event = airports.update("a1", 101, g2)
    hist = airports.history("a1")
    assert [(s.geometry, s.interval) for s in hist] == [(g1, Interval(0, 100)), (g2, Interval(101, NOW))]
    assert all(set(s.attributes) == {"name"} for s in hist)
    assert event.kind == "update"


def test_update_must_move_forward(land):
    land.create("p1", G, {}, 10)
    with pytest.raises(LayerError):
        land.update("p1", 10, LEFT)
    with pytest.raises(LayerError):
        land.update("p1", 3, LEFT)


def test_delete_and_lifespan(land):
    land.create("p1", G, {}, 0)
    land.delete("p1", 51)
    assert land.lifespan() == [Interval(0, 50)]
    assert land.snapshot(51) == []
    with pytest.raises(LayerError):
        land.delete("p1", 60)


def test_reincarnate_leaves_gap(land):
    land.create("p1", G, {}, 0)
    land.delete("p1", 21)
    land.reincarnate("p1", 30, G)
    assert [s.interval for s in land.history("p1")] == [Interval(0, 20), Interval(30, NOW)]
    assert land.snapshot(25) == []


def test_reincarnate_right_after_deletion_is_an_update(land):
    land.create("p1", G, {}, 0)
    land.delete("p1", 21)
    with pytest.raises(LayerError, match="gap"):
        land.reincarnate("p1", 21, G)


def test_reincarnate_unknown_or_live(land):
    with pytest.raises(LayerError, match="unknown"):
        land.reincarnate("zz", 5, G)
    land.create("p1", G, {}, 0)
    with pytest.raises(LayerError, match="live"):
        land.reincarnate("p1", 5, G)


def test_cities_snapshot(fixture_engine):
    assert ids(fixture_engine.layers["Cities"].snapshot(40)) == {"c1"}
    assert fixture_engine.layers["Cities"].snapshot(40)[0].interval == Interval(0, 50)


def test_snapshot_before_creation_is_empty(land):
    land.create("p1", G, {}, 10)
    assert land.snapshot(3) == []


def test_overlapping_stages_rejected():
    with pytest.raises(LayerError):
        Layer("L", "point", (), [
            Stage("a", geo.point(0, 0), {}, Interval(0, 10)),
            Stage("a", geo.point(1, 0), {}, Interval(5, 20)),
        ])


# -- CSV ---------------------------------------------------------------------------------

def test_csv_round_trip(tmp_path, fixture_engine):
    layer = fixture_engine.layers["land"]
    path = tmp_path / "land.csv"
    write_layer_csv(layer, path)
    again = read_layer_csv(path, "land", "polygon")
    assert sorted(again.stages, key=repr) == sorted(layer.stages, key=repr)


def test_csv_reversed_interval_reports_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("object_id,wkt,name,from,to\n"
                    "a,POINT(0 0),x,0,5\n"
                    "b,POINT(1 1),y,9,3\n")
    with pytest.raises(LayerError, match=r"bad\.csv:3"):
        read_layer_csv(path, "L", "point")


def test_csv_bad_wkt_reports_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("object_id,wkt,from,to\na,POINT(0 zero),0,Now\n")
    with pytest.raises(LayerError, match=r"bad\.csv:2"):
        read_layer_csv(path, "L", "point")


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,geom,from,to\n")
    with pytest.raises(LayerError, match="header"):
        read_layer_csv(path, "L", "point")


# -- random operation sequences -------------------------------------------------------

def _random_history(rng: random.Random) -> Layer:
    layer = Layer("R", "polygon", ())
    fresh = iter(f"o{i}" for i in range(1000))
    t = 0
    for _ in range(rng.randint(5, 25)):
        t += rng.randint(1, 3)
        live = sorted(ids(layer.snapshot(t)))
        dead = sorted(layer.object_ids() - set(live))
        op = rng.choice(["create", "split", "merge", "update", "delete", "reincarnate"])
        g = square(0, 0, 1, 1)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if op == "create" or not live:
                    layer.create(next(fresh), g, {}, t)
                elif op == "split":
                    layer.split(rng.choice(live), t, [(next(fresh), g, None), (next(fresh), g, None)])
                elif op == "merge" and len(live) >= 2:
                    layer.merge(rng.sample(live, 2), t, next(fresh), g)
                elif op == "update":
                    layer.update(rng.choice(live), t, g)
                elif op == "delete":
                    layer.delete(rng.choice(live), t)
                elif op == "reincarnate" and dead:
                    layer.reincarnate(rng.choice(dead), t, g)
        except LayerError:
            pass  # e.g. acting on an object created at this very tick
    return layer


@pytest.mark.parametrize("seed", range(30))
def test_random_histories_stay_consistent(seed):
    layer = _random_history(random.Random(seed))
    for oid in layer.object_ids():
        hist = layer.history(oid)
        for a, b in zip(hist, hist[1:]):
            assert a.interval.end < b.interval.start
        assert sum(s.interval.end is NOW for s in hist) <= 1
    last = max(s.interval.start for s in layer.stages)
    for t in range(last + 2):
        snap = layer.snapshot(t)
        assert len(snap) == len(ids(snap))
        assert {s for s in layer.stages if at(s.interval, t)} == set(snap)
