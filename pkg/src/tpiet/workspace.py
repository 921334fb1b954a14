"""Workspace configuration files.

A workspace is an INI file whose paths are relative to the file itself::

    [time]
    granularity = year          ; or day
    epoch = 0                   ; a year, or yyyy-mm-dd for day granularity
    current_tick = 2024         ; or "today" (day granularity)

    [warehouse]
    dimension_mode = temporal   ; or static
    time_dimension = Time

    [layer land]
    kind = polygon
    file = land.csv

    [dimension Land]
    file = dim_land.csv

    [cube Sales]
    dimensions = Land, Time, Product
    measures = Parcel Sales, Production Cost
    facts = sales.csv

    [mapping Land]
    level = Land parcelId
    layer = land
    file = alpha_land.csv
"""
from __future__ import annotations

import configparser
import datetime
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .engine import Engine
from .errors import TPietError, WorkspaceError
from .layers import read_layer_csv, write_layer_csv
from .olap import (
    STATIC, TEMPORAL, Cube, Link, Warehouse, read_dimension_csv, read_facts_csv,
    read_mapping_csv, write_dimension_csv, write_mapping_csv,
)
from .temporal import TimeConfig

__all__ = ["WorkspaceConfig", "read_config", "load_workspace", "save_workspace", "default_path", "FIXTURE"]

FIXTURE = Path(__file__).parent / "data" / "fixture" / "workspace.ini"


@dataclass
class WorkspaceConfig:
    path: Path
    time: TimeConfig
    dimension_mode: str = TEMPORAL
    time_dimension: Optional[str] = None
    layers: dict[str, tuple[str, Path]] = field(default_factory=dict)
    dimensions: dict[str, Path] = field(default_factory=dict)
    cubes: dict[str, tuple[list[str], list[str], Path]] = field(default_factory=dict)
    mappings: dict[str, tuple[str, str, Path]] = field(default_factory=dict)


def default_path() -> Optional[str]:
    return os.environ.get("TPIET_WORKSPACE")


def _split_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _time_section(cp: configparser.ConfigParser) -> TimeConfig:
    sec = cp["time"] if cp.has_section("time") else {}
    gran = sec.get("granularity", "year").strip().lower()
    epoch_text = sec.get("epoch", "0").strip()
    try:
        if gran == "day":
            epoch = datetime.date.fromisoformat(epoch_text)
        else:
            epoch = int(epoch_text)
    except ValueError:
        raise WorkspaceError(f"[time] epoch {epoch_text!r} is not valid for granularity {gran}") from None
    now_text = sec.get("current_tick", "0").strip()
    if now_text.lower() == "today":
        base = TimeConfig(gran, epoch, 0)
        t = datetime.date.today()
        tick = base.date_to_tick(t.year, t.month, t.day)
    else:
        try:
            tick = int(now_text)
        except ValueError:
            raise WorkspaceError(f"[time] current_tick {now_text!r} is not an integer or 'today'") from None
    try:
        return TimeConfig(gran, epoch, tick)
    except TPietError as e:
        raise WorkspaceError(f"[time] {e}") from None


def read_config(path: str | Path) -> WorkspaceConfig:
    path = Path(path)
    if not path.is_file():
        raise WorkspaceError(f"workspace file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read(path)
    except configparser.Error as e:
        raise WorkspaceError(f"{path}: {e}") from None
    base = path.parent
    cfg = WorkspaceConfig(path, _time_section(cp))
    if cp.has_section("warehouse"):
        wh = cp["warehouse"]
        cfg.dimension_mode = wh.get("dimension_mode", TEMPORAL).strip().lower()
        if cfg.dimension_mode not in (STATIC, TEMPORAL):
            raise WorkspaceError(f"dimension_mode must be static or temporal, not {cfg.dimension_mode!r}")
        cfg.time_dimension = wh.get("time_dimension") or None

    def need(sec, key):
        if key not in cp[sec]:
            raise WorkspaceError(f"{path}: section [{sec}] needs '{key}'")
        return cp[sec][key].strip()

    for sec in cp.sections():
        kind, _, name = sec.partition(" ")
        name = name.strip()
        if kind in ("time", "warehouse"):
            continue
        if not name:
            raise WorkspaceError(f"{path}: section [{sec}] needs a name")
        if kind == "layer":
            cfg.layers[name] = (need(sec, "kind"), base / need(sec, "file"))
        elif kind == "dimension":
            cfg.dimensions[name] = base / need(sec, "file")
        elif kind == "cube":
            cfg.cubes[name] = (
                _split_list(need(sec, "dimensions")), _split_list(need(sec, "measures")),
                base / need(sec, "facts"),
            )
        elif kind == "mapping":
            cfg.mappings[name] = (need(sec, "level"), need(sec, "layer"), base / need(sec, "file"))
        else:
            raise WorkspaceError(f"{path}: unknown section [{sec}]")
    return cfg


def _check_file(p: Path) -> None:
    if not p.is_file():
        raise WorkspaceError(f"missing file: {p}")


def load_workspace(path: str | Path, check: bool = True) -> tuple[Engine, WorkspaceConfig]:
    """Load every store named by the config; any failure is a WorkspaceError
    naming the offending file (and row, where applicable). With ``check``,
    cross-store inconsistencies are errors too."""
    cfg = read_config(path)
    try:
        layers = {}
        for name, (kind, f) in cfg.layers.items():
            _check_file(f)
            layers[name] = read_layer_csv(f, name, kind)
        warehouse = None
        if cfg.dimensions or cfg.cubes or cfg.mappings:
            dims = []
            for name, f in cfg.dimensions.items():
                _check_file(f)
                dims.append(read_dimension_csv(f, name))
            cubes = []
            for name, (dnames, measures, f) in cfg.cubes.items():
                _check_file(f)
                cubes.append(Cube(name, tuple(dnames), tuple(measures), read_facts_csv(f, dnames, measures)))
            alpha, links = [], []
            for dname, (level, layer, f) in cfg.mappings.items():
                _check_file(f)
                alpha += read_mapping_csv(f, dname, level)
                links.append(Link(dname, level, layer))
            warehouse = Warehouse(
                dims, cubes, alpha, links, cfg.dimension_mode, cfg.time_dimension, cfg.time.member_interval,
            )
            for lk in links:
                d = warehouse.dimension(lk.dimension)
                if lk.level not in d.levels:
                    raise WorkspaceError(f"mapping {lk.dimension}: dimension has no level {lk.level!r}")
                if lk.layer not in layers:
                    raise WorkspaceError(f"mapping {lk.dimension}: unknown layer {lk.layer!r}")
    except WorkspaceError:
        raise
    except TPietError as e:
        raise WorkspaceError(str(e)) from None
    engine = Engine(layers, warehouse, cfg.time)
    problems = engine.validate() if check else []
    if problems:
        raise WorkspaceError("workspace is inconsistent:\n  " + "\n  ".join(problems))
    return engine, cfg


def save_workspace(engine: Engine, cfg: WorkspaceConfig) -> list[Path]:
    """Rewrite the layer, dimension and mapping files from the engine state.
    Fact files are never modified."""
    cat = engine.catalog()
    written = []
    for name, (_, f) in cfg.layers.items():
        write_layer_csv(cat.layers[name], f)
        written.append(f)
    wh = cat.warehouse
    if wh is not None:
        for name, f in cfg.dimensions.items():
            write_dimension_csv(wh.dimensions[name], f)
            written.append(f)
        for dname, (level, layer, f) in cfg.mappings.items():
            write_mapping_csv([r for r in wh.alpha if r.dimension == dname], f)
            written.append(f)
    return written
