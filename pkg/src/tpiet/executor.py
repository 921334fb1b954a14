"""Evaluation of validated TPiet-QL queries over a store snapshot.

GIS queries use cartesian-product semantics over the stages of the FROM
layers. Under OVERLAP only stage combinations whose intervals share a tick
are kept and the shared interval is attached to the row; otherwise the
row carries the interval of the single projected alias. Spatial
predicates are evaluated once per combination since geometry is fixed
within a stage.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from . import geometry as geo
from .errors import EvaluationError, IntervalError, WarehouseError
from .layers import Layer, Stage
from .olap import COMPARATORS, CubeResult, MeasureRef, Warehouse
from .ql import ast
from .ql.validate import GEOMETRY_ATTRS, ID_ATTR
from .temporal import (
    INSTANT_PREDICATES, INTERVAL_PREDICATES, NOW, Interval, TemporalRow,
    TimeConfig, coalesce, iintersection,
)

__all__ = ["ResultRelation", "Executor", "eval_t_joins", "gt_join", "JoinedRow"]


@dataclass
class ResultRelation:
    """Tabular query result; temporal results end with FROM and TO columns."""

    columns: list[str]
    rows: list[tuple]
    temporal: bool = False

    def __len__(self):
        return len(self.rows)

    def keys(self) -> list[tuple]:
        """Rows without their interval columns."""
        return [r[:-2] for r in self.rows] if self.temporal else list(self.rows)


@dataclass(frozen=True)
class JoinedRow:
    left: Any
    right: Any
    intervals: tuple  # (intersection,) for overlap joins, (left, right) otherwise


def _interval_of(row) -> Interval:
    return row if isinstance(row, Interval) else row.interval


def eval_t_joins(left: Iterable, right: Iterable, kind: str) -> list[JoinedRow]:
    """Temporal join of interval-stamped rows.

    ``before``: X.TO <= Y.FROM; ``meet``: X.TO = Y.FROM; ``overlap``:
    X.TO >= Y.FROM and Y.TO >= X.FROM, attaching the shared interval.
    """
    right = list(right)
    out = []
    for x in left:
        xi = _interval_of(x)
        for y in right:
            yi = _interval_of(y)
            if kind == "overlap":
                if xi.end >= yi.start and yi.end >= xi.start:
                    out.append(JoinedRow(x, y, (iintersection(xi, yi),)))
            elif kind == "before":
                if xi.end <= yi.start:
                    out.append(JoinedRow(x, y, (xi, yi)))
            elif kind == "meet":
                if xi.end == yi.start:
                    out.append(JoinedRow(x, y, (xi, yi)))
            else:
                raise ValueError(f"unknown join kind {kind!r}")
    return out


def gt_join(xs: Iterable[Stage], ys: Iterable[Stage],
            predicate: Callable[[Stage, Stage], bool]) -> list[tuple]:
    """Overlap join filtered by a non-temporal predicate.

    Returns raw ``(x.id, y.id, FROM, TO)`` tuples, one per qualifying stage
    pair, without coalescing.
    """
    rows = []
    for j in eval_t_joins(xs, ys, "overlap"):
        if predicate(j.left, j.right):
            iv = j.intervals[0]
            rows.append((j.left.object_id, j.right.object_id, iv.start, iv.end))
    return sorted(rows, key=lambda r: (r[0], r[1], r[2]))


class Executor:
    """Evaluates validated queries against an immutable view of the stores."""

    def __init__(self, layers: Mapping[str, Layer], warehouse: Optional[Warehouse],
                 time: TimeConfig, current_tick: Optional[int] = None):
        self.layers = layers
        self.warehouse = warehouse
        self.time = time
        self.current_tick = time.current_tick if current_tick is None else current_tick
        self._memo: dict[int, Any] = {}
        self._memo_keep: list = []

    def run(self, q: ast.Query):
        if isinstance(q, ast.GisQuery):
            return self.eval_gis(q)
        return self.eval_cube(q)

    def _memoized(self, node, fn):
        key = id(node)
        if key not in self._memo:
            self._memo[key] = fn(node)
            self._memo_keep.append(node)
        return self._memo[key]

    # -- literals ---------------------------------------------------------

    def instant(self, lit) -> int:
        if isinstance(lit, ast.NowLit):
            return self.current_tick
        if isinstance(lit, ast.DateLit):
            try:
                return self.time.date_to_tick(lit.year, lit.month, lit.day)
            except (IntervalError, ValueError) as e:
                raise EvaluationError(str(e)) from None
        return lit.value

    def window(self, lit: ast.IntervalLit) -> Interval:
        start = self.instant(lit.start)
        end = NOW if isinstance(lit.end, ast.NowLit) else self.instant(lit.end)
        try:
            return Interval(start, end)
        except IntervalError as e:
            raise EvaluationError(f"bad interval literal: {e}") from None

    # -- GIS --------------------------------------------------------------

    def eval_gis(self, q: ast.GisQuery) -> ResultRelation:
        aliases = [s.alias for s in q.sources]
        layers = [self.layers[s.layer] for s in q.sources]
        alias_layer = dict(zip(aliases, layers))
        in_sets = {}
        if q.where is not None:
            for node in _in_atoms(q.where):
                in_sets[id(node)] = self._memoized(node, lambda n: self._in_ids(n, alias_layer[n.ref.alias]))
        windows: dict[int, Any] = {}

        columns = []
        for p in q.projection:
            if p.attr is None:
                lay = alias_layer[p.alias]
                columns.append(f"{p.alias}.{ID_ATTR}")
                columns += [f"{p.alias}.{a}" for a in lay.attribute_schema]
            else:
                columns.append(f"{p.alias}.{p.attr}")
        projected = list(dict.fromkeys(p.alias for p in q.projection))
        interval_alias = projected[0] if len(projected) == 1 else None

        def cond(c, env) -> bool:
            if isinstance(c, ast.And):
                return all(cond(i, env) for i in c.items)
            if isinstance(c, ast.Or):
                return any(cond(i, env) for i in c.items)
            if isinstance(c, ast.Not):
                return not cond(c.item, env)
            if isinstance(c, ast.Bool):
                return c.value
            if isinstance(c, ast.SpatialPred):
                a, b = (env[r.alias].geometry for r in c.args)
                return geo.SPATIAL_PREDICATES[c.name](a, b)
            if isinstance(c, ast.TemporalPred):
                iv = env[c.alias].interval
                key = id(c)
                if key not in windows:
                    windows[key] = (
                        self.window(c.arg) if isinstance(c.arg, ast.IntervalLit) else self.instant(c.arg)
                    )
                if c.name in INTERVAL_PREDICATES:
                    return INTERVAL_PREDICATES[c.name](iv, windows[key])
                if iv.end is NOW:
                    # an open stage ends at the current tick when compared with an instant
                    iv = Interval(iv.start, max(iv.start, self.current_tick))
                return INSTANT_PREDICATES[c.name](iv, windows[key])
            if isinstance(c, ast.Compare):
                return _compare(c.op, value(c.left, env), value(c.right, env))
            if isinstance(c, ast.InCube):
                return env[c.ref.alias].object_id in in_sets[id(c)]
            raise EvaluationError(f"cannot evaluate {c!r}")

        def value(e, env):
            if isinstance(e, (ast.Number, ast.String)):
                return e.value
            if isinstance(e, ast.AttrRef):
                st = env[e.alias]
                if e.attr is None or e.attr in GEOMETRY_ATTRS:
                    return st.geometry
                if e.attr == ID_ATTR:
                    return st.object_id
                return st.attributes[e.attr]
            if isinstance(e, ast.Func):
                gs = [env[a.alias].geometry for a in e.args]
                try:
                    return geo.distance(*gs) if e.name == "distance" else geo.area(*gs)
                except geo.GeometryError as err:
                    raise EvaluationError(f"{ast.DISPLAY_NAMES[e.name]}: {err}") from None
            raise EvaluationError(f"cannot evaluate {e!r}")

        def project(env) -> tuple:
            out = []
            for p in q.projection:
                st = env[p.alias]
                if p.attr is None:
                    out.append(st.object_id)
                    out += [st.attributes[a] for a in alias_layer[p.alias].attribute_schema]
                else:
                    out.append(value(p, env))
            return tuple(out)

        rows: list[TemporalRow] = []
        keys: set = set()
        for env, shared in self._candidates(aliases, layers, q.overlap):
            if q.where is not None and not cond(q.where, env):
                continue
            if q.modifier == "CURRENT" and not all(st.interval.end is NOW for st in env.values()):
                continue
            key = project(env)
            if q.modifier:
                keys.add(key)
            else:
                iv = shared if q.overlap else env[interval_alias].interval
                rows.append(TemporalRow(key, iv))

        if q.modifier:
            return ResultRelation(columns, sorted(keys, key=repr), temporal=False)
        out = [(*r.key, r.interval.start, r.interval.end) for r in coalesce(rows)]
        return ResultRelation([*columns, "FROM", "TO"], out, temporal=True)

    def _candidates(self, aliases: Sequence[str], layers: Sequence[Layer], overlap: bool):
        """Yield (alias -> stage, shared interval) for every stage combination;
        under OVERLAP, combinations without a common tick are pruned early."""
        env: dict[str, Stage] = {}
        n = len(aliases)

        def rec(i, shared):
            if i == n:
                yield dict(env), shared
                return
            for st in layers[i].stages:
                nxt = shared
                if overlap:
                    nxt = st.interval if shared is None else iintersection(shared, st.interval)
                    if nxt is None:
                        continue
                env[aliases[i]] = st
                yield from rec(i + 1, nxt)
            env.pop(aliases[i], None)

        yield from rec(0, None)

    def _in_ids(self, node: ast.InCube, layer: Layer) -> set[str]:
        """Object ids of ``layer`` mapped from the member set of a cube subquery."""
        result = self._memoized(node.query, self.eval_cube)
        wh = self.warehouse
        link = wh.link(result.dimension, layer.name)
        if link is None or link.level != result.level:
            return set()
        context = self._cube_context(node.query)
        return wh.objects_for_members(link.dimension, link.level, result.members, layer.name, context)

    def _cube_context(self, q: ast.CubeQuery) -> Optional[Interval]:
        wh = self.warehouse
        cube = wh.cube(q.cube)
        paths = [s for s in q.slicers if isinstance(s, ast.MemberPath)]
        if q.slice is not None:
            paths.append(q.slice)
        return wh.temporal_context([wh.resolve_path(p, cube) for p in paths])

    # -- CUBE -------------------------------------------------------------

    def eval_cube(self, q: ast.CubeQuery) -> CubeResult:
        if self.warehouse is None:
            raise EvaluationError("no warehouse is loaded")
        gis_ids = None
        gis_layer = None
        for s in q.slicers:
            if isinstance(s, ast.InGis):
                sub = self._memoized(s.query, self.eval_gis)
                alias = s.query.projection[0].alias
                gis_layer = next(src.layer for src in s.query.sources if src.alias == alias)
                if sub.temporal:
                    gis_ids = [(r[0], Interval(r[-2], r[-1])) for r in sub.rows]
                else:
                    gis_ids = [(r[0], None) for r in sub.rows]
        try:
            return self.warehouse.eval_cube_query(q, gis_ids, gis_layer)
        except WarehouseError as e:
            raise EvaluationError(str(e)) from None

    # -- plans ------------------------------------------------------------

    def explain(self, q: ast.Query, indent: str = "") -> str:
        from .ql.printer import format_query

        lines = []
        if isinstance(q, ast.GisQuery):
            kind = "overlap join" if q.overlap else "disjoint join (cartesian product)"
            lines.append(f"{indent}GIS query: {kind}, {len(q.sources)} source{'s' if len(q.sources) != 1 else ''}")
            total = 1
            for s in q.sources:
                n = len(self.layers[s.layer].stages)
                total *= n
                lines.append(f"{indent}  scan {s.layer} as {s.alias}: {n} stages")
            if total == 0:
                lines.append(f"{indent}  zero-cardinality source: short-circuit, result is empty")
            else:
                prune = ", pruned to combinations with a common tick" if q.overlap else ""
                lines.append(f"{indent}  nested-loop over {total} stage combinations{prune}")
            if q.where is not None:
                for i, atom in enumerate(_atoms(q.where), 1):
                    if isinstance(atom, ast.InCube):
                        lines.append(f"{indent}  predicate {i}: {atom.ref.alias}.id IN cube subquery "
                                     f"(evaluated once, memoized)")
                        lines.append(self.explain(atom.query, indent + "    "))
                    else:
                        text = format_query(ast.GisQuery((ast.AttrRef("x"),), (ast.Source("L", "x"),), atom))
                        lines.append(f"{indent}  predicate {i}: {text.split(' WHERE ', 1)[1]}")
            if q.modifier == "CURRENT":
                lines.append(f"{indent}  keep combinations whose stages are all live (TO = Now)")
            lines.append(f"{indent}  project {', '.join(p.alias + ('.' + p.attr if p.attr else '') for p in q.projection)}")
            if q.modifier:
                lines.append(f"{indent}  {q.modifier}: drop intervals, remove duplicate rows")
            else:
                lines.append(f"{indent}  coalesce on all projected attributes")
        else:
            lines.append(f"{indent}CUBE query on [{q.cube}]")
            for s in q.slicers:
                if isinstance(s, ast.InGis):
                    lines.append(f"{indent}  filter {'.'.join(s.path.parts)} IN GIS subquery "
                                 f"(evaluated once, memoized; ids mapped to members)")
                    lines.append(self.explain(s.query, indent + "    "))
                else:
                    lines.append(f"{indent}  slicer {'.'.join(s.parts)}")
            if q.slice is not None:
                lines.append(f"{indent}  slicer {'.'.join(q.slice.parts)}")
            if isinstance(q.select, ast.FilterSelect):
                f = q.select
                lines.append(f"{indent}  member set: {'.'.join(f.level.parts)} where SUM({'.'.join(f.measure.parts)}) "
                             f"{f.op} {f.value.value}")
            else:
                wh = self.warehouse
                cube = wh.cube(q.cube)
                refs = [(p, wh.resolve_path(p, cube)) for p in q.select]
                measures = [r.name for _, r in refs if isinstance(r, MeasureRef)]
                rows = ['.'.join(p.parts) for p, r in refs if not isinstance(r, MeasureRef)]
                by = f" by {rows[0]}" if rows else " over all facts"
                lines.append(f"{indent}  aggregate SUM of {', '.join(measures)}{by}")
        return "\n".join(lines)


def _atoms(c):
    if isinstance(c, (ast.And, ast.Or)):
        for i in c.items:
            yield from _atoms(i)
    elif isinstance(c, ast.Not):
        yield from _atoms(c.item)
    else:
        yield c


def _in_atoms(c):
    return [a for a in _atoms(c) if isinstance(a, ast.InCube)]


def _compare(op: str, a, b) -> bool:
    num = (int, float)
    same = (isinstance(a, num) and isinstance(b, num)) or (isinstance(a, str) and isinstance(b, str))
    if not same:
        if op == "=":
            return False
        if op == "<>":
            return True
        raise EvaluationError(f"cannot order {a!r} against {b!r}")
    return COMPARATORS[op](a, b)
