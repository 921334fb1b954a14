"""Text, CSV and GeoJSON renderings of query results."""
from __future__ import annotations

import csv
import io
import json
from typing import Union

from .executor import ResultRelation
from .geometry import Geometry, to_wkt
from .olap import CubeResult
from .temporal import NOW

__all__ = ["render", "render_table", "render_csv", "render_geojson", "geometry_to_geojson", "FORMATS"]

FORMATS = ("table", "csv", "geojson")

Result = Union[ResultRelation, CubeResult]


def _cell(v) -> str:
    if v is NOW:
        return "Now"
    if isinstance(v, Geometry):
        return to_wkt(v)
    if isinstance(v, float):
        return f"{v:g}" if v == int(v) and abs(v) < 1e15 else repr(v)
    return str(v)


def render_table(result: Result) -> str:
    cols = list(result.columns)
    body = [[_cell(v) for v in row] for row in result.rows]
    widths = [len(c) for c in cols]
    for row in body:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]

    def line(cells):
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    out = [line(cols), "-+-".join("-" * w for w in widths)]
    out += [line(r) for r in body]
    n = len(body)
    out.append(f"({n} row{'s' if n != 1 else ''})")
    return "\n".join(out) + "\n"


def render_csv(result: Result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def geometry_to_geojson(g: Geometry) -> dict:
    if g.kind == "point":
        return {"type": "Point", "coordinates": list(g.coords[0])}
    if g.kind == "linestring":
        return {"type": "LineString", "coordinates": [list(c) for c in g.coords]}
    return {"type": "Polygon", "coordinates": [[list(c) for c in g.coords]]}


def _json_value(v):
    if v is NOW:
        return "Now"
    if isinstance(v, Geometry):
        return to_wkt(v)
    return v


def render_geojson(result: Result) -> str:
    """FeatureCollection with one feature per row. The first geometry-valued
    column becomes the feature geometry; ``from``/``to`` properties are
    present only for temporal results."""
    temporal = isinstance(result, ResultRelation) and result.temporal
    cols = list(result.columns)
    data_cols = cols[:-2] if temporal else cols
    features = []
    for row in result.rows:
        geom = None
        props = {}
        for name, v in zip(data_cols, row):
            if isinstance(v, Geometry) and geom is None:
                geom = geometry_to_geojson(v)
                continue
            props[name] = _json_value(v)
        if temporal:
            props["from"] = _json_value(row[-2])
            props["to"] = _json_value(row[-1])
        features.append({"type": "Feature", "geometry": geom, "properties": props})
    return json.dumps({"type": "FeatureCollection", "features": features}, indent=2) + "\n"


def render(result: Result, fmt: str = "table") -> str:
    if fmt == "table":
        return render_table(result)
    if fmt == "csv":
        return render_csv(result)
    if fmt == "geojson":
        return render_geojson(result)
    raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")
