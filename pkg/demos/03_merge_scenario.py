"""Merge two parcels and watch the change reach the Land dimension."""
from __future__ import annotations

from tpiet import geometry as geo
from tpiet.engine import parse_opspec
from tpiet.render import render
from tpiet.workspace import FIXTURE, load_workspace

engine, _ = load_workspace(FIXTURE)

before = "SELECT GIS SNAPSHOT l.id FROM land l WHERE AT(l, {})"
print(render(engine.query(before.format(2014))))

# p3 and p4 become p3-4 in 2015; the new member rolls up to region r2
result = engine.apply(parse_opspec("merge land p3 p4 @2015 p3-4 --rollup r2"))
print(result.describe())

# operations swap in a fresh warehouse, so fetch it after the change
wh = engine.warehouse

print(render(engine.query(before.format(2014))))
print(render(engine.query(before.format(2015))))
print("area of p3-4:", geo.area(engine.layers["land"].live_stage("p3-4").geometry))

# old members close the year before the merge, the new one starts at it
for row in wh.dimension("Land").rows:
    if row.member in ("p3", "p4", "p3-4"):
        print(row)
print("p3-4 ->", wh.rollup_member("Land", "p3-4", "region", 2015))
print("p3 in 2014 ->", wh.rollup_member("Land", "p3", "region", 2014))

# the mapping follows along, so GIS and cube stay consistent
print("mapping problems:", wh.validate_alpha(engine.layers))
