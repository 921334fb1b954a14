"""Walk through the bundled workspace: layers, snapshots and a few queries."""
from __future__ import annotations

from tpiet.render import render
from tpiet.workspace import FIXTURE, load_workspace

engine, cfg = load_workspace(FIXTURE)
print(engine.summary())

# every layer keeps the full history of its objects as stages
land = engine.layers["land"]
for s in land.stages:
    print(s.object_id, s.attributes, s.interval)

# a snapshot is the set of stages alive at one tick
print("alive in 2000:", sorted(s.object_id for s in land.snapshot(2000)))
print("alive in 2010:", sorted(s.object_id for s in land.snapshot(2010)))

# without a modifier each row carries the interval during which it held
res = engine.query('SELECT GIS l.id, l.landuse FROM land l WHERE l.landuse = "pasture"')
print(render(res))

# SNAPSHOT drops the interval columns; CURRENT keeps what is alive now
print(render(engine.query("SELECT GIS SNAPSHOT c.id FROM Cities c")))
print(render(engine.query("SELECT GIS CURRENT c.id FROM Cities c")))

# OVERLAP joins keep combinations whose stages coexist, tagged with the shared interval
res = engine.query("SELECT GIS a.id, c.id FROM OVERLAP Airports a, Cities c WHERE Contains(c, a)")
print(render(res))
