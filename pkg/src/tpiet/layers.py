"""Thematic layers: temporal relations of spatio-temporal object stages, with
the discrete-change update operations (create, split, merge, update, delete,
reincarnate)."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from . import geometry as geo
from .errors import GeometryError, IntervalError, LayerError
from .geometry import Geometry
from .temporal import NOW, Instant, Interval, coalesce_intervals, parse_instant

__all__ = ["Stage", "ChangeEvent", "Layer", "read_layer_csv", "write_layer_csv", "parse_value"]

Scalar = Any  # str | int | float


@dataclass(frozen=True)
class Stage:
    """One row of an object's history: fixed geometry and attributes over
    one validity interval."""

    object_id: str
    geometry: Geometry
    attributes: Mapping[str, Scalar]
    interval: Interval

    def __hash__(self):
        return hash((self.object_id, self.geometry, tuple(sorted(self.attributes.items())), self.interval))


@dataclass(frozen=True)
class ChangeEvent:
    """Record of a layer mutation, consumed by warehouse propagation."""

    kind: str  # create | split | merge | update | delete | reincarnate
    layer: str
    old_ids: tuple[str, ...]
    new_ids: tuple[str, ...]
    instant: int


Part = tuple[str, Geometry, Mapping[str, Scalar]]


@dataclass
class Layer:
    name: str
    geometry_kind: str
    attribute_schema: tuple[str, ...] = ()
    stages: list[Stage] = field(default_factory=list)

    def __post_init__(self):
        if self.geometry_kind not in ("point", "linestring", "polygon"):
            raise LayerError(f"layer {self.name}: unknown geometry kind {self.geometry_kind!r}")
        self.attribute_schema = tuple(self.attribute_schema)
        stages, self.stages = list(self.stages), []
        for s in stages:
            self._insert(s)

    def copy(self) -> "Layer":
        """Shallow copy sharing the (immutable) stages; skips re-validation."""
        new = object.__new__(Layer)
        new.name = self.name
        new.geometry_kind = self.geometry_kind
        new.attribute_schema = self.attribute_schema
        new.stages = list(self.stages)
        return new

    # -- queries -----------------------------------------------------------

    def object_ids(self) -> set[str]:
        return {s.object_id for s in self.stages}

    def history(self, object_id: str) -> list[Stage]:
        return sorted(
            (s for s in self.stages if s.object_id == object_id),
            key=lambda s: s.interval.start,
        )

    def live_stage(self, object_id: str) -> Optional[Stage]:
        for s in self.stages:
            if s.object_id == object_id and s.interval.end is NOW:
                return s
        return None

    def snapshot(self, t: Instant, current_tick: Optional[int] = None) -> list[Stage]:
        """Stages valid at ``t``. ``Now`` resolves to ``current_tick``."""
        if t is NOW:
            if current_tick is None:
                raise IntervalError("snapshot at Now needs the current tick")
            t = current_tick
        return [s for s in self.stages if s.interval.contains(t)]

    def lifespan(self) -> list[Interval]:
        return coalesce_intervals(s.interval for s in self.stages)

    # -- invariants --------------------------------------------------------

    def _check_stage(self, s: Stage) -> None:
        if s.geometry.kind != self.geometry_kind:
            raise LayerError(
                f"layer {self.name} holds {self.geometry_kind} geometries, got {s.geometry.kind}"
            )
        names = tuple(s.attributes)
        if set(names) != set(self.attribute_schema):
            raise LayerError(
                f"object {s.object_id}: attributes {sorted(names)} do not match "
                f"layer schema {list(self.attribute_schema)}"
            )
        for other in self.stages:
            if other.object_id != s.object_id:
                continue
            if other.interval.start <= s.interval.end and s.interval.start <= other.interval.end:
                raise LayerError(
                    f"object {s.object_id}: stage {s.interval} overlaps stage {other.interval}"
                )

    def _insert(self, s: Stage) -> Stage:
        self._check_stage(s)
        self.stages.append(s)
        return s

    def _close(self, s: Stage, t: int) -> Stage:
        closed = replace(s, interval=Interval(s.interval.start, t - 1))
        self.stages[self.stages.index(s)] = closed
        return closed

    def _require_live(self, object_id: str, t: int, what: str) -> Stage:
        s = self.live_stage(object_id)
        if s is None:
            raise LayerError(f"{what}: object {object_id} has no live stage in layer {self.name}")
        if not isinstance(t, int) or t is NOW:
            raise LayerError(f"{what}: instant must be a finite tick")
        if t <= s.interval.start:
            raise LayerError(
                f"{what}: instant {t} must be later than {object_id}'s current FROM {s.interval.start}"
            )
        return s

    def _require_fresh(self, object_id: str, what: str) -> None:
        if object_id in self.object_ids():
            raise LayerError(f"{what}: object id {object_id} already exists in layer {self.name}")

    def _attrs(self, attributes: Optional[Mapping[str, Scalar]], default=None) -> dict:
        if attributes is None:
            attributes = default if default is not None else {}
        return dict(attributes)

    # -- update operations -------------------------------------------------

    def create(self, object_id: str, geometry: Geometry, attributes=None, t: int = 0) -> Stage:
        if self.live_stage(object_id) is not None:
            raise LayerError(f"create: object {object_id} already has a live stage in layer {self.name}")
        if object_id in self.object_ids():
            raise LayerError(
                f"create: object {object_id} existed before in layer {self.name}; use reincarnate"
            )
        if t is NOW:
            raise LayerError("create: instant must be a finite tick")
        stage = Stage(object_id, geometry, self._attrs(attributes), Interval(t, NOW))
        return self._insert(stage)

    def split(self, parent_id: str, t: int, parts: Sequence[Part]) -> tuple[list[Stage], ChangeEvent]:
        if len(parts) < 2:
            raise LayerError("split: needs at least two parts")
        parent = self._require_live(parent_id, t, "split")
        ids = [p[0] for p in parts]
        if len(set(ids)) != len(ids):
            raise LayerError("split: part ids must be distinct")
        for pid in ids:
            self._require_fresh(pid, "split")
        for _, g, _ in parts:
            if g.kind != self.geometry_kind:
                raise LayerError(f"split: layer {self.name} holds {self.geometry_kind} geometries")
        self._close(parent, t)
        created = [
            self._insert(Stage(pid, g, self._attrs(a, parent.attributes), Interval(t, NOW)))
            for pid, g, a in parts
        ]
        _lint_area([parent.geometry], [s.geometry for s in created], "split")
        return created, ChangeEvent("split", self.name, (parent_id,), tuple(ids), t)

    def merge(self, parent_ids: Sequence[str], t: int, new_id: str, geometry: Geometry,
              attributes=None) -> tuple[Stage, ChangeEvent]:
        if len(parent_ids) < 2:
            raise LayerError("merge: needs at least two parents")
        if len(set(parent_ids)) != len(parent_ids):
            raise LayerError("merge: parent ids must be distinct")
        parents = [self._require_live(p, t, "merge") for p in parent_ids]
        self._require_fresh(new_id, "merge")
        if geometry.kind != self.geometry_kind:
            raise LayerError(f"merge: layer {self.name} holds {self.geometry_kind} geometries")
        for p in parents:
            self._close(p, t)
        stage = self._insert(
            Stage(new_id, geometry, self._attrs(attributes, parents[0].attributes), Interval(t, NOW))
        )
        _lint_area([p.geometry for p in parents], [geometry], "merge")
        return stage, ChangeEvent("merge", self.name, tuple(parent_ids), (new_id,), t)

    def update(self, object_id: str, t: int, geometry: Optional[Geometry] = None,
               attributes=None) -> tuple[Stage, ChangeEvent]:
        current = self._require_live(object_id, t, "update")
        self._close(current, t)
        stage = self._insert(Stage(
            object_id,
            geometry if geometry is not None else current.geometry,
            self._attrs(attributes, current.attributes),
            Interval(t, NOW),
        ))
        return stage, ChangeEvent("update", self.name, (object_id,), (object_id,), t)

    def delete(self, object_id: str, t: int) -> tuple[Stage, ChangeEvent]:
        current = self._require_live(object_id, t, "delete")
        closed = self._close(current, t)
        return closed, ChangeEvent("delete", self.name, (object_id,), (), t)

    def reincarnate(self, object_id: str, t: int, geometry: Geometry,
                    attributes=None) -> tuple[Stage, ChangeEvent]:
        hist = self.history(object_id)
        if not hist:
            raise LayerError(f"reincarnate: unknown object {object_id} in layer {self.name}")
        if hist[-1].interval.end is NOW:
            raise LayerError(f"reincarnate: object {object_id} is still live")
        last_end = hist[-1].interval.end
        if t <= last_end + 1:
            raise LayerError(
                f"reincarnate: instant {t} must leave a gap after {last_end} (use update for consecutive changes)"
            )
        stage = self._insert(Stage(
            object_id, geometry, self._attrs(attributes, hist[-1].attributes), Interval(t, NOW)
        ))
        return stage, ChangeEvent("reincarnate", self.name, (), (object_id,), t)


def _lint_area(before: list[Geometry], after: list[Geometry], op: str) -> None:
    if any(g.kind != "polygon" for g in before + after):
        return
    a0 = sum(geo.area(g) for g in before)
    a1 = sum(geo.area(g) for g in after)
    if a0 > 0 and abs(a1 - a0) / a0 > 0.01:
        warnings.warn(f"{op}: resulting area {a1:g} differs from original area {a0:g} by more than 1%")


# ----------------------------------------------------------------------------
# CSV persistence: object_id,wkt,<attr...>,from,to

def parse_value(text: str) -> Scalar:
    """CSV cell to int, float or str."""
    s = text.strip()
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_layer_csv(path: str | Path, name: str, kind: str) -> Layer:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise LayerError(f"{path}: empty layer file") from None
        if len(header) < 4 or header[:2] != ["object_id", "wkt"] or header[-2:] != ["from", "to"]:
            raise LayerError(f"{path}: header must be object_id,wkt,<attr...>,from,to")
        attrs = tuple(header[2:-2])
        layer = Layer(name, kind, attrs)
        for rowno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise LayerError(f"{path}:{rowno}: expected {len(header)} fields, got {len(row)}")
            try:
                g = geo.parse_wkt(row[1])
                start = parse_instant(row[-2])
                if start is NOW:
                    raise IntervalError("from cannot be Now")
                iv = Interval(start, parse_instant(row[-1]))
                stage = Stage(row[0].strip(), g, {a: parse_value(v) for a, v in zip(attrs, row[2:-2])}, iv)
                if stage.interval.live and layer.live_stage(stage.object_id) is not None:
                    raise LayerError(f"object {stage.object_id} has two live stages")
                layer._insert(stage)
            except (GeometryError, IntervalError, LayerError) as e:
                raise LayerError(f"{path}:{rowno}: {e}") from None
    return layer


def write_layer_csv(layer: Layer, path: str | Path) -> None:
    rows = sorted(layer.stages, key=lambda s: (s.object_id, s.interval.start))
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["object_id", "wkt", *layer.attribute_schema, "from", "to"])
        for s in rows:
            w.writerow([
                s.object_id, geo.to_wkt(s.geometry),
                *(s.attributes[a] for a in layer.attribute_schema),
                s.interval.start, s.interval.end,
            ])


def layer_from_stages(name: str, kind: str, schema: Iterable[str], stages: Iterable[Stage]) -> Layer:
    return Layer(name, kind, tuple(schema), list(stages))
