from __future__ import annotations

import random
from dataclasses import replace

import pytest

from tpiet import geometry as geo
from tpiet.engine import Engine
from tpiet.errors import EvaluationError
from tpiet.executor import Executor, eval_t_joins
from tpiet.layers import Layer, Stage
from tpiet.ql import ast
from tpiet.ql.parser import parse
from tpiet.ql.printer import format_query
from tpiet.temporal import NOW, Interval, TimeConfig, at

import oracles
import randgen

TIME = TimeConfig(current_tick=oracles.NOW_TICK)
RIVER_SALES = ('SELECT GIS l.id FROM land l, rivers lr WHERE intersects(l, lr) AND lr.name = "Uruguay" '
               'AND l IN (SELECT CUBE filter([Land].[Land parcelId].Members, [Measures].[Parcel Sales] > {}) '
               'FROM [Sales])')


def iv(a, b):
    return Interval(a, b)


# -- temporal joins ---------------------------------------------------------------------

def test_before_join_allows_equality():
    out = eval_t_joins([iv(0, 10)], [iv(10, 20)], "before")
    assert [j.intervals for j in out] == [(iv(0, 10), iv(10, 20))]


def test_meet_join_needs_exact_equality():
    assert eval_t_joins([iv(0, 10)], [iv(11, 20)], "meet") == []
    assert len(eval_t_joins([iv(0, 10)], [iv(10, 20)], "meet")) == 1


def test_overlap_join_attaches_intersection():
    out = eval_t_joins([iv(0, 10)], [iv(10, 20)], "overlap")
    assert out[0].intervals == (iv(10, 10),)
    assert eval_t_joins([iv(0, 9)], [iv(10, NOW)], "overlap") == []


def test_unknown_join_kind():
    with pytest.raises(ValueError):
        eval_t_joins([iv(0, 1)], [iv(0, 1)], "sideways")


# -- fixture queries ---------------------------------------------------------------------

def test_gt_join_is_coalesced_at_query_level(fixture_engine):
    res = fixture_engine.query(
        "SELECT GIS a.id, c.id FROM OVERLAP Airports a, Cities c WHERE Contains(c, a)"
    )
    assert res.rows == [("a1", "c1", 51, 200)]


def test_false_condition_gives_empty_result(fixture_engine):
    assert fixture_engine.query("SELECT GIS l.id FROM land l WHERE FALSE").rows == []


def test_empty_member_set_gives_empty_result(fixture_engine):
    assert fixture_engine.query(RIVER_SALES.format(10**9)).rows == []


def test_current_keeps_live_rows_only(fixture_engine):
    res = fixture_engine.query("SELECT GIS CURRENT c.id FROM Cities c")
    assert res.rows == [("c1",)] and not res.temporal


def test_snapshot_drops_intervals_and_duplicates(fixture_engine):
    res = fixture_engine.query("SELECT GIS SNAPSHOT p.owner FROM Parcels p")
    assert sorted(res.rows) == [("Pereira",), ("Ruiz",), ("Silva",)]


def test_instant_predicate_on_open_stage_reads_current_tick(fixture_engine):
    # p1 is open-ended; at the current tick it has not finished after Now
    res = fixture_engine.query("SELECT GIS l.id FROM land l WHERE FinishesAfter(l, Now) AND l.id = \"p1\"")
    assert res.rows == []
    res = fixture_engine.query("SELECT GIS l.id FROM land l WHERE AT(l, Now) AND l.id = \"p1\"")
    assert res.rows == [("p1", 1990, NOW)]


def test_ordering_mismatched_types_is_an_error(fixture_engine):
    wh = fixture_engine.warehouse
    layer = Layer("Mixed", "point", ("v",), [
        Stage("a", geo.point(0, 0), {"v": 1}, iv(0, NOW)),
        Stage("b", geo.point(1, 0), {"v": "x"}, iv(0, NOW)),
    ])
    engine = Engine({"Mixed": layer}, wh, TIME)
    assert engine.query('SELECT GIS m.id FROM Mixed m WHERE m.v = 1').keys() == [("a",)]
    with pytest.raises(EvaluationError):
        engine.query("SELECT GIS m.id FROM Mixed m WHERE m.v < 2")


def test_subquery_evaluated_once(fixture_engine, monkeypatch):
    calls = []
    original = Executor.eval_cube

    def counting(self, q):
        calls.append(q)
        return original(self, q)

    monkeypatch.setattr(Executor, "eval_cube", counting)
    fixture_engine.query(RIVER_SALES.format(5000))
    assert len(calls) == 1


# -- explain --------------------------------------------------------------------------

def test_explain_distance_query(fixture_engine):
    plan = fixture_engine.explain(
        "SELECT GIS c, p FROM OVERLAP Parcels p, Cities c WHERE Distance(c.the_geom, p.the_geom) < 100"
    )
    assert "overlap join, 2 sources" in plan
    assert "scan Parcels as p: 4 stages" in plan
    assert "predicate 1: Distance(c.the_geom, p.the_geom) < 100" in plan


def test_explain_nested_in_query(fixture_engine):
    plan = fixture_engine.explain(RIVER_SALES.format(5000))
    assert "evaluated once, memoized" in plan
    assert "CUBE query on [Sales]" in plan


def test_explain_cube_query(fixture_engine):
    plan = fixture_engine.explain(
        "SELECT CUBE [Measures].[qty], [Land].[region] FROM [Production] WHERE [Time].[2009]"
    )
    assert "aggregate SUM of qty by Land.region" in plan


def test_explain_empty_layer_short_circuits(fixture_engine):
    empty = Layer("Roads", "linestring", ())
    engine = Engine({**fixture_engine.layers, "Roads": empty}, fixture_engine.warehouse, TIME)
    plan = engine.explain("SELECT GIS r.id, l.id FROM OVERLAP Roads r, land l")
    assert "zero-cardinality source: short-circuit" in plan


# -- properties on random instances ---------------------------------------------------------

def _temporal_atoms(c) -> bool:
    if isinstance(c, (ast.And, ast.Or)):
        return any(_temporal_atoms(i) for i in c.items)
    if isinstance(c, ast.Not):
        return _temporal_atoms(c.item)
    return isinstance(c, ast.TemporalPred)


def _point_set(res):
    """(key, tick) pairs of a temporal result, with Now read as the tick after the horizon."""
    out = set()
    for r in res.rows:
        mask = oracles.points(Interval(r[-2], r[-1]))
        out |= {(r[:-2], t) for t in range(oracles.NOW_TICK + 1) if mask >> t & 1}
    return out


def _instances(seed, n):
    rng = random.Random(seed)
    for _ in range(n):
        layers = randgen.random_layers(rng)
        yield rng, layers, randgen.random_query(rng, layers)


def test_snapshot_commutation():
    checked = 0
    for rng, layers, q in _instances(11, 150):
        q = replace(q, overlap=True, modifier=None)
        t = rng.randint(0, oracles.HORIZON)
        full = Engine(layers, None, TIME).query(format_query(q))
        want = {r[:-2] for r in full.rows if at(Interval(r[-2], r[-1]), t)}
        snap_layers = {
            n: Layer(n, lay.geometry_kind, lay.attribute_schema, lay.snapshot(t)) for n, lay in layers.items()
        }
        got = Engine(snap_layers, None, TIME).query(format_query(replace(q, modifier="SNAPSHOT")))
        assert set(got.rows) == want, format_query(q)
        checked += bool(want)
    assert checked > 20


def test_overlap_is_monotone():
    for _, layers, q in _instances(12, 150):
        alias = q.projection[0].alias
        q = replace(q, projection=(ast.AttrRef(alias, "id"),), modifier=None)
        plain = Engine(layers, None, TIME).query(format_query(replace(q, overlap=False)))
        joined = Engine(layers, None, TIME).query(format_query(replace(q, overlap=True)))
        assert _point_set(joined) <= _point_set(plain), format_query(q)


@pytest.mark.parametrize("threshold", [0, 3000, 5000, 6500, 10**9])
def test_in_atom_equals_explicit_id_set(fixture_engine, threshold):
    q = parse(RIVER_SALES.format(threshold))
    in_atom = q.where.items[-1]
    members = fixture_engine.warehouse.eval_cube_query(in_atom.query).members
    ids = [ast.Compare("=", ast.AttrRef("l", "id"), ast.String(m)) for m in sorted(members)]
    explicit = ast.Or(tuple(ids)) if len(ids) > 1 else (ids[0] if ids else ast.Bool(False))
    rewritten = replace(q, where=ast.And((*q.where.items[:-1], explicit)))
    assert fixture_engine.query(format_query(q)).rows == fixture_engine.query(format_query(rewritten)).rows


def _presplit(rng, layer: Layer) -> Layer:
    stages = []
    for s in layer.stages:
        end = oracles.tick(s.interval.end)
        if end > s.interval.start and rng.random() < 0.7:
            cut = rng.randint(s.interval.start, end - 1)
            stages += [replace(s, interval=Interval(s.interval.start, cut)),
                       replace(s, interval=Interval(cut + 1, s.interval.end))]
        else:
            stages.append(s)
    return Layer(layer.name, layer.geometry_kind, layer.attribute_schema, stages)


def test_presplit_stages_give_the_same_result():
    checked = 0
    for rng, layers, q in _instances(13, 300):
        if q.where is not None and _temporal_atoms(q.where):
            continue
        split = {n: _presplit(rng, lay) for n, lay in layers.items()}
        text = format_query(q)
        a = Engine(layers, None, TIME).query(text)
        b = Engine(split, None, TIME).query(text)
        assert (a.columns, a.rows) == (b.columns, b.rows), text
        checked += 1
    assert checked > 50
