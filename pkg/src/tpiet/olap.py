"""Warehouse side: dimension hierarchies (optionally versioned as slowly
changing dimensions), fact tables, the member-to-object mapping, the cube
query subset that TPiet-QL embeds, and propagation of layer changes."""
from __future__ import annotations

import csv
import operator
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .errors import IntervalError, WarehouseError
from .layers import ChangeEvent, Layer, parse_value
from .ql import ast
from .temporal import NOW, Instant, Interval, coalesce_intervals, iintersection, parse_instant

__all__ = [
    "MemberRow", "Dimension", "FactTable", "Cube", "AlphaRow", "Link",
    "CubeResult", "Warehouse", "COMPARATORS",
    "read_dimension_csv", "write_dimension_csv", "read_facts_csv",
    "read_mapping_csv", "write_mapping_csv",
]

STATIC, TEMPORAL = "static", "temporal"
ALL_TIME = Interval(0, NOW)

COMPARATORS: dict[str, Callable] = {
    "=": operator.eq, "<>": operator.ne, "<": operator.lt,
    ">": operator.gt, "<=": operator.le, ">=": operator.ge,
}


@dataclass(frozen=True)
class MemberRow:
    member: str
    level: str
    parent: Optional[str]
    interval: Interval = ALL_TIME


class Dimension:
    """A hierarchy whose levels are listed bottom to top.

    Each member row names its parent at the next level up. In temporal mode a
    member may carry several rows over time; lookups at an instant only see
    rows valid then.
    """

    def __init__(self, name: str, rows: Iterable[MemberRow], levels: Optional[Sequence[str]] = None):
        self.name = name
        self.rows: list[MemberRow] = list(rows)
        self.levels: tuple[str, ...] = tuple(levels) if levels else self._infer_levels()
        self._check_structure()

    def copy(self) -> "Dimension":
        return Dimension(self.name, self.rows, self.levels)

    def _infer_levels(self) -> tuple[str, ...]:
        level_of = {}
        for r in self.rows:
            if level_of.setdefault(r.member, r.level) != r.level:
                raise WarehouseError(f"dimension {self.name}: member {r.member} appears on two levels")
        up: dict[str, str] = {}
        all_levels = []
        for r in self.rows:
            if r.level not in all_levels:
                all_levels.append(r.level)
            if r.parent is None:
                continue
            if r.parent not in level_of:
                raise WarehouseError(f"dimension {self.name}: parent {r.parent} of {r.member} is not a member")
            pl = level_of[r.parent]
            if up.setdefault(r.level, pl) != pl:
                raise WarehouseError(f"dimension {self.name}: level {r.level} rolls up to two levels")
        bottoms = [lv for lv in all_levels if lv not in up.values()]
        if len(bottoms) != 1:
            raise WarehouseError(f"dimension {self.name}: levels do not form a single chain")
        chain = [bottoms[0]]
        while chain[-1] in up:
            nxt = up[chain[-1]]
            if nxt in chain:
                raise WarehouseError(f"dimension {self.name}: cyclic level structure")
            chain.append(nxt)
        if len(chain) != len(all_levels):
            raise WarehouseError(f"dimension {self.name}: levels do not form a single chain")
        return tuple(chain)

    def _check_structure(self) -> None:
        spans: dict[str, list[Interval]] = defaultdict(list)
        for r in self.rows:
            if any(iintersection(r.interval, o) is not None for o in spans[r.member]):
                raise WarehouseError(f"dimension {self.name}: member {r.member} has overlapping rows")
            spans[r.member].append(r.interval)
            if r.level not in self.levels:
                raise WarehouseError(f"dimension {self.name}: unknown level {r.level}")
            idx = self.levels.index(r.level)
            if idx == len(self.levels) - 1:
                if r.parent is not None:
                    raise WarehouseError(f"dimension {self.name}: top member {r.member} has a parent")
            else:
                if r.parent is None:
                    raise WarehouseError(f"dimension {self.name}: member {r.member} has no parent")
                if self.level_of(r.parent) != self.levels[idx + 1]:
                    raise WarehouseError(
                        f"dimension {self.name}: parent {r.parent} of {r.member} is not on level {self.levels[idx + 1]}"
                    )

    # -- lookups ------------------------------------------------------------

    def has_member(self, member: str) -> bool:
        return any(r.member == member for r in self.rows)

    def level_of(self, member: str) -> str:
        for r in self.rows:
            if r.member == member:
                return r.level
        raise WarehouseError(f"dimension {self.name}: unknown member {member}")

    def row_at(self, member: str, t: Optional[Instant] = None) -> MemberRow:
        rows = [r for r in self.rows if r.member == member]
        if not rows:
            raise WarehouseError(f"dimension {self.name}: unknown member {member}")
        if t is None:
            return max(rows, key=lambda r: r.interval.start)
        valid = [r for r in rows if r.interval.contains(t)]
        if not valid:
            raise WarehouseError(f"dimension {self.name}: member {member} is not valid at {t}")
        return valid[0]

    def members(self, level: str, t: Optional[Instant] = None) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.rows:
            if r.level == level and (t is None or r.interval.contains(t)):
                seen[r.member] = None
        return list(seen)

    def children(self, member: str, t: Optional[Instant] = None) -> list[str]:
        return sorted({
            r.member for r in self.rows
            if r.parent == member and (t is None or r.interval.contains(t))
        })

    def rollup(self, member: str, target_level: str, t: Optional[Instant] = None) -> str:
        """Ancestor of ``member`` at ``target_level``; identity on its own level."""
        if target_level not in self.levels:
            raise WarehouseError(f"dimension {self.name}: unknown level {target_level}")
        level = self.level_of(member)
        if self.levels.index(target_level) < self.levels.index(level):
            raise WarehouseError(
                f"dimension {self.name}: no rollup path from {level} down to {target_level}"
            )
        current = member
        row = self.row_at(current, t)
        while row.level != target_level:
            current = row.parent
            row = self.row_at(current, t)
        return current

    def check(self, t: Optional[Instant] = None) -> list[str]:
        """Well-formedness problems of the dimension as seen at ``t``."""
        problems = []
        by_member: dict[str, list[MemberRow]] = defaultdict(list)
        for r in self.rows:
            if t is None or r.interval.contains(t):
                by_member[r.member].append(r)
        for m, rows in by_member.items():
            if len(rows) > 1:
                problems.append(f"{m} has {len(rows)} rows at {t}")
                continue
            r = rows[0]
            if r.parent is None:
                continue
            if r.parent not in by_member:
                problems.append(f"{m} rolls up to {r.parent}, which is not valid at {t}")
        return problems


@dataclass
class FactTable:
    dimensions: tuple[str, ...]
    measures: tuple[str, ...]
    rows: list[tuple[tuple[str, ...], tuple[float, ...]]] = field(default_factory=list)


@dataclass
class Cube:
    name: str
    dimensions: tuple[str, ...]
    measures: tuple[str, ...]
    facts: FactTable


@dataclass(frozen=True)
class AlphaRow:
    dimension: str
    level: str
    member: str
    layer: str
    object_id: str
    interval: Interval = ALL_TIME


@dataclass(frozen=True)
class Link:
    """Static declaration that ``dimension.level`` maps onto ``layer``."""

    dimension: str
    level: str
    layer: str


@dataclass
class CubeResult:
    columns: list[str]
    rows: list[tuple]
    members: Optional[frozenset] = None  # set for filter(...) queries
    dimension: Optional[str] = None
    level: Optional[str] = None


# -- path resolution ------------------------------------------------------------

@dataclass(frozen=True)
class MeasureRef:
    name: str


@dataclass(frozen=True)
class LevelRef:
    dimension: str
    level: str


@dataclass(frozen=True)
class MemberRef:
    dimension: str
    member: str


def _match(name: str, options: Iterable[str]) -> Optional[str]:
    options = list(options)
    if name in options:
        return name
    low = [o for o in options if o.lower() == name.lower()]
    return low[0] if len(low) == 1 else None


class Warehouse:
    """Dimensions, cubes and the temporal member/object mapping."""

    def __init__(
        self,
        dimensions: Iterable[Dimension] = (),
        cubes: Iterable[Cube] = (),
        alpha: Iterable[AlphaRow] = (),
        links: Iterable[Link] = (),
        mode: str = TEMPORAL,
        time_dimension: Optional[str] = None,
        member_ticks: Optional[Callable[[str], Optional[Interval]]] = None,
    ):
        if mode not in (STATIC, TEMPORAL):
            raise WarehouseError(f"dimension mode must be static or temporal, not {mode!r}")
        self.dimensions = {d.name: d for d in dimensions}
        self.cubes = {c.name: c for c in cubes}
        self.alpha = list(alpha)
        self.links = list(links)
        self.mode = mode
        self.time_dimension = time_dimension
        self.member_ticks = member_ticks or (lambda member: None)
        for c in self.cubes.values():
            self._check_facts(c)

    def copy(self) -> "Warehouse":
        return Warehouse(
            [d.copy() for d in self.dimensions.values()], self.cubes.values(), self.alpha,
            self.links, self.mode, self.time_dimension, self.member_ticks,
        )

    def _check_facts(self, cube: Cube) -> None:
        for d in cube.dimensions:
            if d not in self.dimensions:
                raise WarehouseError(f"cube {cube.name}: unknown dimension {d}")
        known = {d: {r.member for r in self.dimensions[d].rows} for d in cube.dimensions}
        for i, (keys, _) in enumerate(cube.facts.rows, start=1):
            for d, k in zip(cube.facts.dimensions, keys):
                if k not in known[d]:
                    raise WarehouseError(f"cube {cube.name}: fact row {i} references unknown {d} member {k}")

    # -- name resolution --------------------------------------------------

    def dimension(self, name: str) -> Dimension:
        key = _match(name, self.dimensions)
        if key is None:
            raise WarehouseError(f"unknown dimension {name}")
        return self.dimensions[key]

    def cube(self, name: str) -> Cube:
        key = _match(name, self.cubes)
        if key is None:
            raise WarehouseError(f"unknown cube {name}")
        return self.cubes[key]

    def resolve_path(self, path: ast.MemberPath, cube: Optional[Cube] = None):
        parts = path.parts
        if len(parts) == 2 and parts[0].lower() == "measures":
            if cube is None:
                raise WarehouseError("measure reference outside a cube")
            m = _match(parts[1], cube.measures)
            if m is None:
                raise WarehouseError(f"cube {cube.name} has no measure {parts[1]}")
            return MeasureRef(m)
        if len(parts) not in (2, 3):
            raise WarehouseError(f"cannot resolve {'.'.join(parts)}")
        dim = self.dimension(parts[0])
        if cube is not None and dim.name not in cube.dimensions:
            raise WarehouseError(f"cube {cube.name} has no dimension {dim.name}")
        if len(parts) == 2:
            level = _match(parts[1], dim.levels)
            if level is not None:
                return LevelRef(dim.name, level)
            if dim.has_member(parts[1]):
                return MemberRef(dim.name, parts[1])
            raise WarehouseError(f"dimension {dim.name} has no level or member {parts[1]}")
        level = _match(parts[1], dim.levels)
        if level is None:
            raise WarehouseError(f"dimension {dim.name} has no level {parts[1]}")
        if not dim.has_member(parts[2]) or dim.level_of(parts[2]) != level:
            raise WarehouseError(f"level {dim.name}.{level} has no member {parts[2]}")
        return MemberRef(dim.name, parts[2])

    def link(self, dimension: str, layer: str) -> Optional[Link]:
        for lk in self.links:
            if lk.dimension == dimension and lk.layer.lower() == layer.lower():
                return lk
        return None

    def link_for_layer(self, layer: str) -> Optional[Link]:
        for lk in self.links:
            if lk.layer.lower() == layer.lower():
                return lk
        return None

    def rollup_member(self, dimension: str, member: str, target_level: str,
                      t: Optional[Instant] = None) -> str:
        """Ancestor at ``target_level``. ``t`` is honoured in temporal mode only."""
        dim = self.dimension(dimension)
        return dim.rollup(member, target_level, t if self.mode == TEMPORAL else None)

    # -- mapping ------------------------------------------------------------

    def objects_for_members(self, dimension: str, level: str, members: Iterable[str],
                            layer: str, context: Optional[Interval] = None) -> set[str]:
        members = set(members)
        return {
            r.object_id for r in self.alpha
            if r.dimension == dimension and r.level == level and r.member in members
            and r.layer.lower() == layer.lower()
            and (context is None or iintersection(r.interval, context) is not None)
        }

    def members_for_objects(self, dimension: str, level: str, layer: str,
                            objects: Iterable[tuple[str, Optional[Interval]]],
                            context: Optional[Interval] = None) -> set[str]:
        """Members mapped to any of ``objects``; each object may carry the
        interval during which it qualified."""
        wanted: dict[str, list[Optional[Interval]]] = defaultdict(list)
        for oid, iv in objects:
            wanted[oid].append(iv)
        out = set()
        for r in self.alpha:
            if (r.dimension != dimension or r.level != level
                    or r.layer.lower() != layer.lower() or r.object_id not in wanted):
                continue
            for iv in wanted[r.object_id]:
                window = r.interval
                for extra in (iv, context):
                    if extra is not None and window is not None:
                        window = iintersection(window, extra)
                if window is not None:
                    out.add(r.member)
                    break
        return out

    # -- cube evaluation ----------------------------------------------------

    def temporal_context(self, slicers: Iterable[MemberRef]) -> Optional[Interval]:
        ctx: Optional[Interval] = None
        for s in slicers:
            if s.dimension != self.time_dimension:
                continue
            iv = self.member_ticks(s.member)
            if iv is None:
                continue
            if ctx is not None and iintersection(ctx, iv) is None:
                raise WarehouseError("time slicers do not overlap")
            ctx = iv if ctx is None else iintersection(ctx, iv)
        return ctx

    def eval_cube_query(self, q: ast.CubeQuery,
                        gis_ids: Optional[Iterable[tuple[str, Optional[Interval]]]] = None,
                        gis_layer: Optional[str] = None) -> CubeResult:
        """Evaluate a cube query.

        ``gis_ids`` are the object identifiers (with optional validity
        intervals) produced by the query's embedded GIS subquery, whose
        layer is ``gis_layer``.
        """
        cube = self.cube(q.cube)
        slicer_paths = [s for s in q.slicers if isinstance(s, ast.MemberPath)]
        if q.slice is not None:
            slicer_paths.append(q.slice)
        slicers = []
        for p in slicer_paths:
            ref = self.resolve_path(p, cube)
            if not isinstance(ref, MemberRef):
                raise WarehouseError(f"slicer {'.'.join(p.parts)} must name a member")
            slicers.append(ref)
        context = self.temporal_context(slicers)

        # Member restrictions per dimension: (level, allowed members)
        restrictions: list[tuple[str, str, set[str]]] = [
            (s.dimension, self.dimension(s.dimension).level_of(s.member), {s.member}) for s in slicers
        ]
        in_filters = [s for s in q.slicers if isinstance(s, ast.InGis)]
        if len(in_filters) > 1:
            raise WarehouseError("at most one IN filter per cube query")
        if in_filters:
            ref = self.resolve_path(in_filters[0].path, cube)
            if isinstance(ref, MeasureRef):
                raise WarehouseError("IN filter must reference a dimension")
            if gis_layer is None:
                raise WarehouseError("IN filter evaluated without a GIS subquery result")
            link = self.link(ref.dimension, gis_layer)
            if link is None:
                raise WarehouseError(f"dimension {ref.dimension} is not mapped to layer {gis_layer}")
            mapped = self.members_for_objects(link.dimension, link.level, gis_layer, gis_ids or (), context)
            restrictions.append((link.dimension, link.level, mapped))
            if isinstance(ref, MemberRef):
                dim = self.dimension(ref.dimension)
                restrictions.append((ref.dimension, dim.level_of(ref.member), {ref.member}))

        facts = self._filtered_facts(cube, restrictions)

        if isinstance(q.select, ast.FilterSelect):
            return self._eval_filter(cube, q.select, facts, restrictions)
        return self._eval_table(cube, q.select, facts)

    def _fact_rollup(self, dim: Dimension, member: str, level: str) -> Optional[str]:
        try:
            return dim.rollup(member, level)
        except WarehouseError:
            return None

    def _filtered_facts(self, cube: Cube, restrictions):
        facts = cube.facts
        out = []
        for keys, values in facts.rows:
            ok = True
            for dname, level, allowed in restrictions:
                i = facts.dimensions.index(dname)
                anc = self._fact_rollup(self.dimensions[dname], keys[i], level)
                if anc not in allowed:
                    ok = False
                    break
            if ok:
                out.append((keys, values))
        return out

    def _aggregate(self, cube: Cube, facts, dname: str, level: str, measure: str) -> dict[str, float]:
        i = cube.facts.dimensions.index(dname)
        j = cube.facts.measures.index(measure)
        dim = self.dimensions[dname]
        totals: dict[str, float] = defaultdict(float)
        for keys, values in facts:
            anc = self._fact_rollup(dim, keys[i], level)
            if anc is not None:
                totals[anc] += values[j]
        return totals

    def _eval_filter(self, cube: Cube, sel: ast.FilterSelect, facts, restrictions) -> CubeResult:
        level_ref = self.resolve_path(sel.level, cube)
        if not isinstance(level_ref, LevelRef):
            raise WarehouseError(f"filter needs a level, got {'.'.join(sel.level.parts)}")
        measure = self.resolve_path(sel.measure, cube)
        if not isinstance(measure, MeasureRef):
            raise WarehouseError(f"filter condition needs a measure, got {'.'.join(sel.measure.parts)}")
        if sel.op not in COMPARATORS:
            raise WarehouseError(f"unknown comparison {sel.op}")
        if not isinstance(sel.value.value, (int, float)):
            raise WarehouseError("filter threshold must be numeric")
        totals = self._aggregate(cube, facts, level_ref.dimension, level_ref.level, measure.name)
        dim = self.dimensions[level_ref.dimension]
        candidates = dim.members(level_ref.level)
        for dname, level, allowed in restrictions:
            if dname == level_ref.dimension:
                candidates = [
                    m for m in candidates
                    if self._restricted_ok(dim, m, level_ref.level, level, allowed)
                ]
        cmp = COMPARATORS[sel.op]
        members = sorted(m for m in candidates if cmp(totals.get(m, 0.0), sel.value.value))
        return CubeResult(
            columns=[level_ref.level, measure.name],
            rows=[(m, totals.get(m, 0.0)) for m in members],
            members=frozenset(members),
            dimension=level_ref.dimension,
            level=level_ref.level,
        )

    def _restricted_ok(self, dim: Dimension, member: str, member_level: str, level: str, allowed) -> bool:
        li, mi = dim.levels.index(level), dim.levels.index(member_level)
        if mi <= li:
            return self._fact_rollup(dim, member, level) in allowed
        # Restriction sits below the member: keep it if any allowed member rolls up to it.
        return any(self._fact_rollup(dim, a, member_level) == member for a in allowed)

    def _eval_table(self, cube: Cube, items: tuple, facts) -> CubeResult:
        measures: list[str] = []
        axis = None
        for p in items:
            ref = self.resolve_path(p, cube)
            if isinstance(ref, MeasureRef):
                measures.append(ref.name)
            elif axis is None:
                axis = ref
            else:
                raise WarehouseError("only one dimension item may appear on the row axis")
        if not measures:
            raise WarehouseError("cube query selects no measures")
        if axis is None:
            labels = [("All", None, None)]
        elif isinstance(axis, LevelRef):
            dim = self.dimensions[axis.dimension]
            labels = [(m, axis.dimension, axis.level) for m in dim.members(axis.level)]
        else:
            dim = self.dimensions[axis.dimension]
            labels = [(axis.member, axis.dimension, dim.level_of(axis.member))]
        rows = []
        for label, dname, level in labels:
            values = []
            for meas in measures:
                j = cube.facts.measures.index(meas)
                if dname is None:
                    total = sum(v[j] for _, v in facts)
                else:
                    total = self._aggregate(cube, facts, dname, level, meas).get(label, 0.0)
                values.append(total)
            rows.append((label, *values))
        head = axis.level if isinstance(axis, LevelRef) else (axis.dimension if axis else "member")
        return CubeResult(columns=[head, *measures], rows=rows)

    # -- change propagation -------------------------------------------------

    def propagate_change(self, event: ChangeEvent,
                         rollup: Union[None, str, Mapping[str, str]] = None) -> list[str]:
        """Apply a split/merge event to dimensions and mapping.

        ``rollup`` names the parent member of each new member (one name for
        all, or a mapping per new id). Other event kinds leave the warehouse
        untouched. Returns a human-readable list of edits.
        """
        if event.kind not in ("split", "merge"):
            return []
        link = self.link_for_layer(event.layer)
        if link is None:
            return []
        dim = self.dimensions[link.dimension]
        t = event.instant
        lvl_idx = dim.levels.index(link.level)
        parent_level = dim.levels[lvl_idx + 1] if lvl_idx + 1 < len(dim.levels) else None

        old_members = []
        for oid in event.old_ids:
            mapped = {
                r.member for r in self.alpha
                if r.layer.lower() == event.layer.lower() and r.object_id == oid
                and r.dimension == dim.name and r.interval.end is NOW
            }
            if not mapped and dim.has_member(oid):
                mapped = {oid}
            if not mapped:
                raise WarehouseError(f"event references unknown member for object {oid}")
            old_members.extend(sorted(mapped))

        parents: dict[str, Optional[str]] = {}
        for nid in event.new_ids:
            if dim.has_member(nid):
                raise WarehouseError(f"dimension {dim.name} already has a member {nid}")
            if parent_level is None:
                parents[nid] = None
                continue
            p = rollup.get(nid) if isinstance(rollup, Mapping) else rollup
            if p is None:
                raise WarehouseError(f"no rollup parent given for new member {nid}")
            if not dim.has_member(p) or dim.level_of(p) != parent_level:
                raise WarehouseError(f"rollup parent {p} is not a member of level {parent_level}")
            if self.mode == TEMPORAL and not any(
                r.member == p and r.interval.contains(t) for r in dim.rows
            ):
                raise WarehouseError(f"rollup parent {p} is not valid at {t}")
            parents[nid] = p

        edits = []
        old_set = set(old_members)
        if self.mode == TEMPORAL:
            rows = []
            for r in dim.rows:
                if r.member in old_set and r.interval.end is NOW:
                    if r.interval.start > t - 1:
                        raise WarehouseError(f"member {r.member} cannot be closed before it starts")
                    r = replace(r, interval=Interval(r.interval.start, t - 1))
                    edits.append(f"closed member {dim.name}.{r.member} at {t - 1}")
                rows.append(r)
            alpha = []
            for a in self.alpha:
                if (a.layer.lower() == event.layer.lower() and a.object_id in event.old_ids
                        and a.interval.end is NOW):
                    a = replace(a, interval=Interval(a.interval.start, t - 1))
                    edits.append(f"closed mapping {a.member} -> {a.layer}.{a.object_id} at {t - 1}")
                alpha.append(a)
        else:
            rows = [r for r in dim.rows if r.member not in old_set]
            alpha = [
                a for a in self.alpha
                if not (a.layer.lower() == event.layer.lower() and a.object_id in event.old_ids)
            ]
            edits += [f"removed member {dim.name}.{m}" for m in old_members]
        for nid in event.new_ids:
            rows.append(MemberRow(nid, link.level, parents[nid], Interval(t, NOW)))
            alpha.append(AlphaRow(dim.name, link.level, nid, link.layer, nid, Interval(t, NOW)))
            edits.append(
                f"added member {dim.name}.{nid}" + (f" under {parents[nid]}" if parents[nid] else "")
            )
            edits.append(f"mapped {nid} -> {link.layer}.{nid} from {t}")
        self.dimensions[dim.name] = Dimension(dim.name, rows, dim.levels)
        self.alpha = alpha
        return edits

    # -- validation ---------------------------------------------------------

    def validate_alpha(self, layers: Mapping[str, Layer]) -> list[str]:
        """Consistency problems between the mapping and the layers."""
        problems = []
        by_name = {k.lower(): v for k, v in layers.items()}
        seen: dict[tuple[str, str], list[Interval]] = defaultdict(list)
        for r in self.alpha:
            layer = by_name.get(r.layer.lower())
            if layer is None:
                problems.append(f"mapping {r.member} -> {r.layer}.{r.object_id}: unknown layer")
                continue
            dim = self.dimensions.get(r.dimension)
            if dim is None or not dim.has_member(r.member):
                problems.append(f"mapping {r.member} -> {r.layer}.{r.object_id}: unknown member")
            hist = layer.history(r.object_id)
            if not hist:
                problems.append(f"mapping {r.member} -> {r.layer}.{r.object_id}: unknown object")
                continue
            if r.interval.end is NOW and layer.live_stage(r.object_id) is None:
                problems.append(f"live mapping {r.member} -> {r.layer}.{r.object_id} but the object is not live")
            span = coalesce_intervals(s.interval for s in hist)
            if not any(s.start <= r.interval.start and r.interval.end <= s.end for s in span):
                problems.append(
                    f"mapping {r.member} -> {r.layer}.{r.object_id} {r.interval} lies outside the object's lifespan"
                )
            for other in seen[(r.member, r.object_id)]:
                if iintersection(other, r.interval) is not None:
                    problems.append(f"mapping rows for ({r.member}, {r.object_id}) overlap in time")
            seen[(r.member, r.object_id)].append(r.interval)
        return problems


# ----------------------------------------------------------------------------
# CSV persistence

def _interval(row: Sequence[str]) -> Interval:
    start = parse_instant(row[0])
    if start is NOW:
        raise IntervalError("from cannot be Now")
    return Interval(start, parse_instant(row[1]))


def read_dimension_csv(path: str | Path, name: str) -> Dimension:
    """``member,level,parent[,from,to]``; an empty parent marks a top member."""
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header[:3] != ["member", "level", "parent"] or header[3:] not in ([], ["from", "to"]):
            raise WarehouseError(f"{path}: header must be member,level,parent[,from,to]")
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise WarehouseError(f"{path}:{rowno}: expected {len(header)} fields, got {len(row)}")
            try:
                iv = _interval(row[3:5]) if len(header) == 5 else ALL_TIME
            except IntervalError as e:
                raise WarehouseError(f"{path}:{rowno}: {e}") from None
            rows.append(MemberRow(row[0].strip(), row[1].strip(), row[2].strip() or None, iv))
    try:
        return Dimension(name, rows)
    except WarehouseError as e:
        raise WarehouseError(f"{path}: {e}") from None


def write_dimension_csv(dim: Dimension, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["member", "level", "parent", "from", "to"])
        for r in dim.rows:
            w.writerow([r.member, r.level, r.parent or "", r.interval.start, r.interval.end])


def read_facts_csv(path: str | Path, dimensions: Sequence[str], measures: Sequence[str]) -> FactTable:
    """``<member per dimension>,<measure...>`` with a header naming the columns."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if sorted(header) != sorted([*dimensions, *measures]):
            raise WarehouseError(f"{path}: header must list dimensions {list(dimensions)} and measures {list(measures)}")
        di = [header.index(d) for d in dimensions]
        mi = [header.index(m) for m in measures]
        table = FactTable(tuple(dimensions), tuple(measures))
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise WarehouseError(f"{path}:{rowno}: expected {len(header)} fields, got {len(row)}")
            values = []
            for i in mi:
                v = parse_value(row[i])
                if not isinstance(v, (int, float)):
                    raise WarehouseError(f"{path}:{rowno}: measure {header[i]} is not numeric: {row[i]!r}")
                values.append(v)
            table.rows.append((tuple(row[i].strip() for i in di), tuple(values)))
    return table


def read_mapping_csv(path: str | Path, dimension: str, level: str) -> list[AlphaRow]:
    """``member,layer,object_id,from,to``."""
    path = Path(path)
    out = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["member", "layer", "object_id", "from", "to"]:
            raise WarehouseError(f"{path}: header must be member,layer,object_id,from,to")
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise WarehouseError(f"{path}:{rowno}: expected 5 fields, got {len(row)}")
            try:
                iv = _interval(row[3:5])
            except IntervalError as e:
                raise WarehouseError(f"{path}:{rowno}: {e}") from None
            out.append(AlphaRow(dimension, level, row[0].strip(), row[1].strip(), row[2].strip(), iv))
    return out


def write_mapping_csv(rows: Iterable[AlphaRow], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["member", "layer", "object_id", "from", "to"])
        for r in rows:
            w.writerow([r.member, r.layer, r.object_id, r.interval.start, r.interval.end])
