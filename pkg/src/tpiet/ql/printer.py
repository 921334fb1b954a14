"""Canonical text form of query trees; ``parse(format_query(q)) == q``."""
from __future__ import annotations

from . import ast

__all__ = ["format_query"]


def format_query(q: ast.Query) -> str:
    if isinstance(q, ast.GisQuery):
        return _gis(q)
    return _cube(q)


def _gis(q: ast.GisQuery) -> str:
    parts = ["SELECT GIS"]
    if q.modifier:
        parts.append(q.modifier)
    parts.append(", ".join(_expr(p) for p in q.projection))
    parts.append("FROM")
    if q.overlap:
        parts.append("OVERLAP")
    parts.append(", ".join(f"{s.layer} {s.alias}" for s in q.sources))
    if q.where is not None:
        parts.append("WHERE")
        parts.append(_cond(q.where))
    return " ".join(parts)


def _cond(c, parent=None) -> str:
    if isinstance(c, ast.Or):
        text = " OR ".join(_cond(i, ast.Or) for i in c.items)
        return f"({text})" if parent in (ast.Or, ast.And, ast.Not) else text
    if isinstance(c, ast.And):
        text = " AND ".join(_cond(i, ast.And) for i in c.items)
        return f"({text})" if parent in (ast.And, ast.Not) else text
    if isinstance(c, ast.Not):
        return f"NOT {_cond(c.item, ast.Not)}"
    if isinstance(c, ast.Bool):
        return "TRUE" if c.value else "FALSE"
    if isinstance(c, ast.SpatialPred):
        return f"{ast.DISPLAY_NAMES[c.name]}({', '.join(_expr(a) for a in c.args)})"
    if isinstance(c, ast.TemporalPred):
        return f"{ast.DISPLAY_NAMES[c.name]}({c.alias}, {_temporal_arg(c.arg)})"
    if isinstance(c, ast.Compare):
        return f"{_expr(c.left)} {c.op} {_expr(c.right)}"
    if isinstance(c, ast.InCube):
        return f"{_expr(c.ref)} IN ({_cube(c.query)})"
    raise TypeError(f"not a condition: {c!r}")


def _temporal_arg(a) -> str:
    if isinstance(a, ast.IntervalLit):
        return f"[{_instant(a.start)}, {_instant(a.end)}]"
    return _instant(a)


def _instant(a) -> str:
    if isinstance(a, ast.NowLit):
        return "Now"
    if isinstance(a, ast.DateLit):
        return f"{a.month}/{a.day}/{a.year}"
    return str(a.value)


def _number(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def _expr(e) -> str:
    if isinstance(e, ast.AttrRef):
        return e.alias if e.attr is None else f"{e.alias}.{e.attr}"
    if isinstance(e, ast.Func):
        return f"{ast.DISPLAY_NAMES[e.name]}({', '.join(_expr(a) for a in e.args)})"
    if isinstance(e, ast.Number):
        return _number(e.value)
    if isinstance(e, ast.String):
        escaped = e.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise TypeError(f"not an expression: {e!r}")


def _path(p: ast.MemberPath) -> str:
    return ".".join(f"[{x}]" for x in p.parts)


def _cube(q: ast.CubeQuery) -> str:
    parts = ["SELECT CUBE"]
    if isinstance(q.select, ast.FilterSelect):
        f = q.select
        parts.append(
            f"filter({_path(f.level)}.Members, {_path(f.measure)} {f.op} {_number(f.value.value)})"
        )
    else:
        sel = ", ".join(_path(p) for p in q.select)
        if q.axis:
            sel += f" ON {q.axis}"
        parts.append(sel)
    parts.append(f"FROM [{q.cube}]")
    if q.slicers:
        parts.append("WHERE")
        parts.append(" AND ".join(
            f"{_path(s.path)} IN ({_gis(s.query)})" if isinstance(s, ast.InGis) else _path(s)
            for s in q.slicers
        ))
    if q.slice is not None:
        parts.append(f"SLICE {_path(q.slice)}")
    return " ".join(parts)
