#!/usr/bin/env python3
"""Writes the Table 1 fixture: a manifest whose per-region label counts equal the
published distribution, plus the matching region polygons.

    python3 tools/make_table1_fixture.py tests/fixtures/table1
"""
import json
import sys
from pathlib import Path

CLASSES = ["asphalt", "cobblestone", "grass", "ground_unimproved", "pavement", "transition"]

# region, city, origin (lat, lon), counts in class order
TABLE = [
    ("A", "Bremen", (53.070, 8.780), [0, 1656, 0, 0, 930, 632]),
    ("B", "Bremen", (53.070, 8.810), [44, 577, 0, 1224, 1696, 423]),
    ("C", "Bremen", (53.070, 8.840), [1017, 47, 0, 0, 3501, 300]),
    ("D", "Bremen", (53.100, 8.780), [78, 132, 662, 4252, 0, 39]),
    ("E", "Bremen", (53.100, 8.810), [1500, 476, 571, 288, 1940, 161]),
    ("F", "Bremen", (53.100, 8.840), [1249, 785, 807, 730, 2677, 192]),
    ("G", "Hamburg", (53.550, 9.990), [619, 563, 381, 572, 3034, 227]),
    ("H", "Hannover", (52.370, 9.730), [1136, 1090, 333, 957, 3612, 211]),
]

SIZE = 0.02   # degrees per square side
STEP = 0.0001  # lattice spacing of frame positions
PER_ROW = 150
RUN = 65       # labels are laid out in runs of at most this many frames


def label_sequence(counts):
    left = list(counts)
    out = []
    while any(left):
        for c, n in enumerate(left):
            take = min(n, RUN)
            out.extend([CLASSES[c]] * take)
            left[c] -= take
    return out


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    features = []
    rows = ["frame_id,timestamp_ms,lat,lon,image_ref,segment_id,label"]
    t = 1_600_000_000_000
    for region, city, (lat0, lon0), counts in TABLE:
        ring = [[lon0, lat0], [lon0 + SIZE, lat0], [lon0 + SIZE, lat0 + SIZE], [lon0, lat0 + SIZE], [lon0, lat0]]
        features.append({
            "type": "Feature",
            "properties": {"region_id": region, "city": city},
            "geometry": {"type": "Polygon", "coordinates": [[[round(x, 6) for x in p] for p in ring]]},
        })
        for i, label in enumerate(label_sequence(counts)):
            lat = lat0 + 0.0005 + (i // PER_ROW) * STEP
            lon = lon0 + 0.0005 + (i % PER_ROW) * STEP
            fid = f"{region}-{i:05d}"
            rows.append(f"{fid},{t},{lat:.6f},{lon:.6f},images/{fid}.png,,{label}")
            t += 800
        t += 3_600_000
    (out / "manifest.csv").write_text("\n".join(rows) + "\n")
    (out / "regions.geojson").write_text(json.dumps({"type": "FeatureCollection", "features": features}, indent=1) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/table1")
