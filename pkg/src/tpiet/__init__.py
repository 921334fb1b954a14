"""Spatio-temporal SOLAP engine for TPiet-QL.

Valid-time layers of spatial objects under discrete change, temporal joins
with default coalescing, and GIS/OLAP filtering in both directions.
"""
from __future__ import annotations

from .engine import Engine, parse_opspec
from .errors import (
    EvaluationError, GeometryError, IntervalError, LayerError, QueryError,
    QuerySyntaxError, TPietError, ValidationError, WarehouseError, WorkspaceError,
)
from .executor import Executor, ResultRelation, eval_t_joins, gt_join
from .geometry import Geometry, parse_wkt, to_wkt
from .layers import ChangeEvent, Layer, Stage
from .olap import Warehouse
from .temporal import NOW, Interval, TemporalRow, TimeConfig, coalesce, iintersection
from .workspace import FIXTURE, load_workspace, save_workspace

__all__ = [
    "Engine", "parse_opspec", "Executor", "ResultRelation", "eval_t_joins", "gt_join",
    "Geometry", "parse_wkt", "to_wkt", "ChangeEvent", "Layer", "Stage", "Warehouse",
    "NOW", "Interval", "TemporalRow", "TimeConfig", "coalesce", "iintersection",
    "FIXTURE", "load_workspace", "save_workspace",
    "TPietError", "IntervalError", "GeometryError", "LayerError", "WarehouseError",
    "QueryError", "QuerySyntaxError", "ValidationError", "EvaluationError", "WorkspaceError",
]
