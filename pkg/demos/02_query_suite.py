"""Run the sample query script, with plans and GeoJSON output."""
from __future__ import annotations

from tpiet.cli import split_statements
from tpiet.render import render
from tpiet.workspace import FIXTURE, load_workspace

engine, _ = load_workspace(FIXTURE)
queries = split_statements(FIXTURE.with_name("queries.tpql").read_text())

for text in queries:
    print(text.strip())
    print(engine.explain(text))
    print(render(engine.query(text)))

# the cube side alone: which parcels sold more than 5000 over all years
cube = engine.prepare(
    "SELECT CUBE filter([Land].[Land parcelId].Members, [Measures].[Parcel Sales] > 5000) FROM [Sales]"
)[0]
print("members:", sorted(engine.warehouse.eval_cube_query(cube).members))

# geometry columns render as GeoJSON features
res = engine.query('SELECT GIS SNAPSHOT l.id, l.the_geom FROM land l WHERE l.landuse = "pasture"')
print(render(res, "geojson"))
