"""Engine handle: the loaded stores plus a single-writer lock.

Queries run against an immutable view taken at query start. Update
operations are applied copy-on-write to the affected layer and the
warehouse, with change propagation in the same critical section, and the
new state is published only if every step succeeded.
"""
from __future__ import annotations

import shlex
import threading
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from . import geometry as geo
from .errors import GeometryError, LayerError, WarehouseError
from .executor import Executor
from .layers import ChangeEvent, Layer, Stage, parse_value
from .olap import TEMPORAL, Warehouse
from .ql import ast
from .ql.parser import parse
from .ql.validate import resolve_layer_name, validate
from .temporal import TimeConfig

__all__ = ["Catalog", "Engine", "Operation", "OpResult", "parse_opspec", "OP_KINDS"]

OP_KINDS = ("create", "split", "merge", "update", "delete", "reincarnate")


@dataclass(frozen=True)
class Catalog:
    """Read-only view of the stores used by one query."""

    layers: Mapping[str, Layer]
    warehouse: Optional[Warehouse]
    time: TimeConfig


@dataclass
class Operation:
    kind: str
    layer: str
    ids: list[str]
    t: int
    geometry: Optional[geo.Geometry] = None
    attributes: Optional[dict] = None
    parts: list[tuple] = field(default_factory=list)  # (id, geometry, attrs) for split
    new_id: Optional[str] = None  # merge
    rollup: Optional[object] = None  # str or {new_id: parent}


@dataclass
class OpResult:
    stages: list[Stage]
    event: Optional[ChangeEvent]
    edits: list[str]

    def describe(self) -> str:
        lines = [f"{s.object_id} {s.interval}" for s in self.stages]
        return "\n".join(lines + self.edits)


def _attr_token(tok: str) -> Optional[tuple[str, object]]:
    if "=" in tok and not tok.startswith("@"):
        k, _, v = tok.partition("=")
        if k and k.isidentifier():
            return k, parse_value(v)
    return None


def parse_opspec(spec) -> Operation:
    """Parse an update operation.

    Forms (``WKT`` may be quoted; ``k=v`` sets attributes)::

        create LAYER ID @T WKT [k=v ...]
        update LAYER ID @T [WKT] [k=v ...]
        delete LAYER ID @T
        reincarnate LAYER ID @T WKT [k=v ...]
        split LAYER PARENT @T ID:WKT ID:WKT ... [--rollup P | --rollup ID=P ...]
        merge LAYER ID ID ... @T NEWID[:WKT] [k=v ...] [--rollup P]
    """
    toks = shlex.split(spec) if isinstance(spec, str) else list(spec)
    if len(toks) < 2:
        raise LayerError("operation needs a kind and a layer")
    kind = toks[0].lower()
    if kind not in OP_KINDS:
        raise LayerError(f"unknown operation {toks[0]!r}; expected one of {', '.join(OP_KINDS)}")
    layer = toks[1]
    rest = toks[2:]

    rollup: dict[str, str] = {}
    rollup_all = None
    cleaned = []
    i = 0
    while i < len(rest):
        if rest[i] == "--rollup":
            if i + 1 >= len(rest):
                raise LayerError("--rollup needs a parent member")
            val = rest[i + 1]
            if "=" in val:
                k, _, v = val.partition("=")
                rollup[k] = v
            else:
                rollup_all = val
            i += 2
        else:
            cleaned.append(rest[i])
            i += 1
    at = [j for j, tok in enumerate(cleaned) if tok.startswith("@")]
    if len(at) != 1:
        raise LayerError("operation needs exactly one @instant")
    j = at[0]
    try:
        t = int(cleaned[j][1:])
    except ValueError:
        raise LayerError(f"bad instant {cleaned[j]!r}") from None
    before, after = cleaned[:j], cleaned[j + 1:]
    op = Operation(kind, layer, before, t, rollup=rollup or rollup_all)

    def geometry_and_attrs(tokens, need_geom):
        attrs = {}
        wkt = []
        for tok in tokens:
            kv = _attr_token(tok)
            if kv:
                attrs[kv[0]] = kv[1]
            else:
                wkt.append(tok)
        g = geo.parse_wkt(" ".join(wkt)) if wkt else None
        if need_geom and g is None:
            raise LayerError(f"{kind} needs a geometry")
        return g, (attrs or None)

    if kind in ("create", "update", "delete", "reincarnate"):
        if len(before) != 1:
            raise LayerError(f"{kind} takes one object id before @instant")
        if kind == "delete":
            if after:
                raise LayerError("delete takes no arguments after @instant")
        else:
            op.geometry, op.attributes = geometry_and_attrs(after, kind != "update")
    elif kind == "split":
        if len(before) != 1:
            raise LayerError("split takes one parent id before @instant")
        for tok in after:
            pid, sep, wkt = tok.partition(":")
            if not sep:
                raise LayerError(f"split part {tok!r} must be ID:WKT")
            op.parts.append((pid, geo.parse_wkt(wkt), None))
    else:  # merge
        if not after:
            raise LayerError("merge needs a new id after @instant")
        head, rest_toks = after[0], after[1:]
        new_id, sep, wkt = head.partition(":")
        op.new_id = new_id
        g, op.attributes = geometry_and_attrs(([wkt] if sep else []) + rest_toks, False)
        op.geometry = g
    return op


class Engine:
    """Layers, warehouse and time configuration behind a writer lock."""

    def __init__(self, layers: Mapping[str, Layer], warehouse: Optional[Warehouse] = None,
                 time: Optional[TimeConfig] = None):
        self._layers = dict(layers)
        self._warehouse = warehouse
        self.time = time or TimeConfig()
        self._lock = threading.Lock()

    # -- state ------------------------------------------------------------

    @property
    def layers(self) -> Mapping[str, Layer]:
        return self._layers

    @property
    def warehouse(self) -> Optional[Warehouse]:
        return self._warehouse

    @property
    def current_tick(self) -> int:
        return self.time.current_tick

    def set_now(self, tick: int) -> None:
        with self._lock:
            self.time = TimeConfig(self.time.granularity, self.time.epoch, tick)

    def catalog(self) -> Catalog:
        with self._lock:
            return Catalog(dict(self._layers), self._warehouse, self.time)

    # -- queries ----------------------------------------------------------

    def prepare(self, text: str, catalog: Optional[Catalog] = None) -> tuple[ast.Query, Catalog]:
        cat = catalog or self.catalog()
        return validate(parse(text), cat), cat

    def query(self, text: str):
        q, cat = self.prepare(text)
        return Executor(cat.layers, cat.warehouse, cat.time).run(q)

    def explain(self, text: str) -> str:
        q, cat = self.prepare(text)
        return Executor(cat.layers, cat.warehouse, cat.time).explain(q)

    # -- updates ----------------------------------------------------------

    def apply(self, op: Operation) -> OpResult:
        """Apply ``op`` and propagate it to the warehouse atomically."""
        with self._lock:
            name = resolve_layer_name(self._layers, op.layer)
            if name is None:
                raise LayerError(f"unknown layer {op.layer!r}")
            layer = self._layers[name].copy()
            wh = self._warehouse.copy() if self._warehouse is not None else None
            stages, event = self._mutate(layer, op)
            edits = []
            if wh is not None and event is not None:
                if event.kind in ("split", "merge") and wh.link_for_layer(layer.name) is not None \
                        and op.rollup is None:
                    mode = "temporal" if wh.mode == TEMPORAL else "static"
                    raise WarehouseError(
                        f"{op.kind} on a mapped layer needs --rollup ({mode} dimension mode will not guess a parent)"
                    )
                edits = wh.propagate_change(event, op.rollup)
            layers = dict(self._layers)
            layers[name] = layer
            self._layers = layers
            self._warehouse = wh
            return OpResult(stages, event, edits)

    def _mutate(self, layer: Layer, op: Operation):
        t = op.t
        if op.kind == "create":
            return [layer.create(op.ids[0], op.geometry, op.attributes, t)], \
                ChangeEvent("create", layer.name, (), (op.ids[0],), t)
        if op.kind == "update":
            st, ev = layer.update(op.ids[0], t, op.geometry, op.attributes)
            return [st], ev
        if op.kind == "delete":
            st, ev = layer.delete(op.ids[0], t)
            return [st], ev
        if op.kind == "reincarnate":
            st, ev = layer.reincarnate(op.ids[0], t, op.geometry, op.attributes)
            return [st], ev
        if op.kind == "split":
            sts, ev = layer.split(op.ids[0], t, op.parts)
            return sts, ev
        geometry = op.geometry
        if geometry is None:
            geometry = _union([layer.live_stage(i) for i in op.ids], layer.name)
        st, ev = layer.merge(op.ids, t, op.new_id, geometry, op.attributes)
        return [st], ev

    # -- checks -----------------------------------------------------------

    def validate(self) -> list[str]:
        """Cross-store consistency problems (empty when consistent)."""
        cat = self.catalog()
        problems = []
        if cat.warehouse is not None:
            problems += cat.warehouse.validate_alpha(cat.layers)
            for d in cat.warehouse.dimensions.values():
                problems += [f"dimension {d.name}: {p}" for p in d.check()]
            for lk in cat.warehouse.links:
                if resolve_layer_name(cat.layers, lk.layer) is None:
                    problems.append(f"mapping declared for unknown layer {lk.layer}")
        return problems

    def summary(self) -> str:
        cat = self.catalog()
        lines = []
        for name, layer in cat.layers.items():
            span = ", ".join(repr(i) for i in layer.lifespan()) or "empty"
            lines.append(f"layer {name} ({layer.geometry_kind}): {len(layer.stages)} stages, "
                         f"{len(layer.object_ids())} objects, lifespan {span}")
        wh = cat.warehouse
        if wh is not None:
            for d in wh.dimensions.values():
                lines.append(f"dimension {d.name}: levels {' > '.join(d.levels)}, {len(d.rows)} member rows")
            for c in wh.cubes.values():
                lines.append(f"cube {c.name}: {len(c.facts.rows)} facts, measures {', '.join(c.measures)}")
            lines.append(f"mapping: {len(wh.alpha)} rows, dimension mode {wh.mode}")
        lines.append(f"current tick: {cat.time.current_tick}")
        return "\n".join(lines)


def _union(stages: Sequence[Optional[Stage]], layer: str) -> geo.Geometry:
    if any(s is None for s in stages):
        raise LayerError(f"merge: every parent must be live in layer {layer}")
    from shapely import wkt as shapely_wkt
    from shapely.ops import unary_union

    merged = unary_union([shapely_wkt.loads(geo.to_wkt(s.geometry)) for s in stages])
    if merged.geom_type != "Polygon" or len(merged.interiors):
        raise GeometryError(
            f"merge: parents do not union to a single simple polygon ({merged.geom_type}); give the geometry explicitly"
        )
    return geo.parse_wkt(shapely_wkt.dumps(merged.simplify(0), trim=True))
