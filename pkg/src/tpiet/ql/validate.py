"""Name resolution and static checks of parsed queries against a catalog."""
from __future__ import annotations

import datetime
from dataclasses import replace
from typing import Mapping, Optional, Protocol

from ..errors import ValidationError, WarehouseError
from ..layers import Layer
from ..olap import LevelRef, MeasureRef, MemberRef
from . import ast

__all__ = ["Catalog", "validate", "GEOMETRY_ATTRS", "ID_ATTR", "resolve_layer_name"]

GEOMETRY_ATTRS = ("the_geom", "geom")
ID_ATTR = "id"


class Catalog(Protocol):
    layers: Mapping[str, Layer]
    warehouse: Optional[object]


def resolve_layer_name(layers: Mapping[str, Layer], name: str) -> Optional[str]:
    if name in layers:
        return name
    hits = [k for k in layers if k.lower() == name.lower()]
    return hits[0] if len(hits) == 1 else None


def validate(q: ast.Query, catalog: Catalog) -> ast.Query:
    """Check ``q`` against ``catalog`` and return it with canonical layer names."""
    if isinstance(q, ast.GisQuery):
        return _Gis(catalog, q).run()
    return _cube(catalog, q)


def _attr_type(layer: Layer, attr: str) -> str:
    kinds = set()
    for s in layer.stages:
        v = s.attributes.get(attr)
        kinds.add("num" if isinstance(v, (int, float)) and not isinstance(v, bool) else "str")
    return kinds.pop() if len(kinds) == 1 else "any"


class _Gis:
    def __init__(self, catalog: Catalog, q: ast.GisQuery):
        self.catalog = catalog
        self.q = q
        self.aliases: dict[str, Layer] = {}

    def run(self) -> ast.GisQuery:
        q = self.q
        sources = []
        for s in q.sources:
            name = resolve_layer_name(self.catalog.layers, s.layer)
            if name is None:
                raise ValidationError(f"unknown layer {s.layer!r}")
            if s.alias in self.aliases:
                raise ValidationError(f"duplicate alias {s.alias!r}")
            self.aliases[s.alias] = self.catalog.layers[name]
            sources.append(ast.Source(name, s.alias))
        for p in q.projection:
            self.value_type(p)
        projected = {p.alias for p in q.projection}
        if not q.overlap and q.modifier is None and len(projected) > 1:
            raise ValidationError(
                "a query without OVERLAP that projects several aliases must use SNAPSHOT or CURRENT "
                "(there is no single interval to attach to each row)"
            )
        where = self.cond(q.where) if q.where is not None else None
        return replace(q, sources=tuple(sources), where=where)

    def layer(self, alias: str) -> Layer:
        if alias not in self.aliases:
            raise ValidationError(f"unknown alias {alias!r}")
        return self.aliases[alias]

    def value_type(self, ref: ast.AttrRef) -> str:
        layer = self.layer(ref.alias)
        if ref.attr is None:
            return "object"
        if ref.attr == ID_ATTR:
            return "str"
        if ref.attr in GEOMETRY_ATTRS:
            return "geom"
        if ref.attr not in layer.attribute_schema:
            raise ValidationError(f"layer {layer.name} has no attribute {ref.attr!r}")
        return _attr_type(layer, ref.attr)

    def geom_kind(self, ref: ast.AttrRef) -> str:
        if ref.attr is not None and ref.attr not in GEOMETRY_ATTRS:
            raise ValidationError(f"{ref.alias}.{ref.attr} is not a geometry")
        return self.layer(ref.alias).geometry_kind

    def expr_type(self, e) -> str:
        if isinstance(e, ast.Number):
            return "num"
        if isinstance(e, ast.String):
            return "str"
        if isinstance(e, ast.AttrRef):
            t = self.value_type(e)
            if t in ("object", "geom"):
                raise ValidationError(f"cannot compare geometry {e.alias}{'.' + e.attr if e.attr else ''}")
            return t
        if isinstance(e, ast.Func):
            if e.name == "distance":
                if len(e.args) != 2:
                    raise ValidationError("Distance takes two geometries")
                for a in e.args:
                    self.geom_kind(a)
            else:
                if len(e.args) != 1:
                    raise ValidationError("area takes one geometry")
                kind = self.geom_kind(e.args[0])
                if kind != "polygon":
                    raise ValidationError(f"kind mismatch: area needs a polygon layer, {e.args[0].alias} holds {kind}s")
            return "num"
        raise ValidationError(f"unsupported expression {e!r}")

    def cond(self, c):
        if isinstance(c, (ast.And, ast.Or)):
            return type(c)(tuple(self.cond(i) for i in c.items))
        if isinstance(c, ast.Not):
            return ast.Not(self.cond(c.item))
        if isinstance(c, ast.Bool):
            return c
        if isinstance(c, ast.SpatialPred):
            if len(c.args) != 2:
                raise ValidationError(f"{c.name} takes two geometries")
            kinds = [self.geom_kind(a) for a in c.args]
            if c.name == "crosses" and ("point" in kinds or "linestring" not in kinds):
                raise ValidationError(
                    f"kind mismatch: Crosses needs a line and a line or polygon, got {kinds[0]} and {kinds[1]}"
                )
            return c
        if isinstance(c, ast.TemporalPred):
            self.layer(c.alias)
            args = [c.arg.start, c.arg.end] if isinstance(c.arg, ast.IntervalLit) else [c.arg]
            for a in args:
                if isinstance(a, ast.DateLit):
                    try:
                        datetime.date(a.year, a.month, a.day)
                    except ValueError as e:
                        raise ValidationError(f"invalid date {a.month}/{a.day}/{a.year}: {e}") from None
            return c
        if isinstance(c, ast.Compare):
            lt, rt = self.expr_type(c.left), self.expr_type(c.right)
            if "any" not in (lt, rt) and lt != rt:
                raise ValidationError(f"cannot compare {lt} with {rt}")
            return c
        if isinstance(c, ast.InCube):
            if c.ref.attr != ID_ATTR:
                raise ValidationError("IN applies to an object identifier (alias or alias.id)")
            layer = self.layer(c.ref.alias)
            cube_q = _cube(self.catalog, c.query)
            if not isinstance(cube_q.select, ast.FilterSelect):
                raise ValidationError("a cube subquery under IN must return a member set (filter(...))")
            wh = self.catalog.warehouse
            level = wh.resolve_path(cube_q.select.level, wh.cube(cube_q.cube))
            link = wh.link(level.dimension, layer.name)
            if link is None or link.level != level.level:
                raise ValidationError(
                    f"IN against unmapped level: {level.dimension}.{level.level} is not mapped to layer {layer.name}"
                )
            return ast.InCube(c.ref, cube_q)
        raise ValidationError(f"unsupported condition {c!r}")


def _cube(catalog: Catalog, q: ast.CubeQuery) -> ast.CubeQuery:
    wh = catalog.warehouse
    if wh is None:
        raise ValidationError("no warehouse is loaded")
    try:
        cube = wh.cube(q.cube)
        if isinstance(q.select, ast.FilterSelect):
            ref = wh.resolve_path(q.select.level, cube)
            if not isinstance(ref, LevelRef):
                raise ValidationError(f"filter needs a level, got {'.'.join(q.select.level.parts)}")
            ref = wh.resolve_path(q.select.measure, cube)
            if not isinstance(ref, MeasureRef):
                raise ValidationError("filter condition must compare a measure")
        else:
            dims = 0
            measures = 0
            for p in q.select:
                ref = wh.resolve_path(p, cube)
                if isinstance(ref, MeasureRef):
                    measures += 1
                else:
                    dims += 1
            if measures == 0 or dims > 1:
                raise ValidationError("cube select needs one or more measures and at most one dimension item")
        slicers = []
        in_count = 0
        for s in q.slicers:
            if isinstance(s, ast.InGis):
                in_count += 1
                ref = wh.resolve_path(s.path, cube)
                if isinstance(ref, MeasureRef):
                    raise ValidationError("IN filter must reference a dimension level or member")
                gis = _Gis(catalog, s.query).run()
                aliases = {p.alias for p in gis.projection}
                if len(gis.projection) != 1 or gis.projection[0].attr not in (None, ID_ATTR):
                    raise ValidationError("a GIS subquery under IN must project one object identifier")
                (alias,) = aliases
                layer = next(src.layer for src in gis.sources if src.alias == alias)
                if wh.link(ref.dimension, layer) is None:
                    raise ValidationError(
                        f"IN against unmapped level: dimension {ref.dimension} is not mapped to layer {layer}"
                    )
                slicers.append(ast.InGis(s.path, gis))
            else:
                ref = wh.resolve_path(s, cube)
                if not isinstance(ref, MemberRef):
                    raise ValidationError(f"slicer {'.'.join(s.parts)} must name a member")
                slicers.append(s)
        if in_count > 1:
            raise ValidationError("at most one IN filter per cube query")
        if q.slice is not None:
            ref = wh.resolve_path(q.slice, cube)
            if not isinstance(ref, MemberRef):
                raise ValidationError(f"SLICE {'.'.join(q.slice.parts)} must name a member")
    except WarehouseError as e:
        raise ValidationError(str(e)) from None
    return replace(q, cube=cube.name, slicers=tuple(slicers))
