"""Emit a GeoJSON overlay of a worst-case attack for map rendering.

Buses become points whose ``shed_pct`` property carries their share of the
total shed (size the markers by it); lines become line strings flagged
``interdicted``. Drop the output on geojson.io or any GIS viewer.

Run:  python demos/04_map_overlay.py
"""

import json

from nkshed import AttackerModel, build_geojson, solve_to_report
from nkshed.fixtures import SPATIAL_D, mesh8

net = mesh8()
report = solve_to_report(net, AttackerModel.spatial(3, SPATIAL_D["mesh8"]))

overlay = build_geojson(net, report)
with open("attack_overlay.geojson", "w") as fh:
    json.dump(overlay, fh, indent=2)

hit = [f["properties"] for f in overlay["features"]
       if f["properties"].get("interdicted")]
shedding = [f["properties"] for f in overlay["features"]
            if f["properties"].get("shed_pct", 0) > 0]
print(f"wrote attack_overlay.geojson: {len(overlay['features'])} features")
print(f"interdicted lines: {[p['line_id'] for p in hit]} "
      f"(center bus {report.center_bus})")
for p in shedding:
    print(f"  bus {p['bus_id']}: sheds {p['shed_pu']:.3f} p.u. "
          f"({p['shed_pct']:.1f}% of the lost load)")
