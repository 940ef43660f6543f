"""Classify building footprints into Point / Slab / Line-like Slab / Enclosed Form.

The rule set: any interior ring wins outright; otherwise the aspect ratio
of the minimum-area bounding rectangle decides, with thresholds 1.5 and 8.
"""

from collections import Counter
from pathlib import Path

import numpy as np

from sitemetrics.config import IndicatorConfig
from sitemetrics.forms import classify_polygon, run_forms
from sitemetrics.geojson_io import parse_layers
from sitemetrics.geometry import Polygon, min_bounding_rect
from sitemetrics.ingest import assign_buildings_to_plots

REPO = Path(__file__).resolve().parents[1]
cfg = IndicatorConfig.from_file(REPO / "data/synthetic_town/config.json")


def rect(w, h, hole=False):
    ring = np.array([[0, 0], [w, 0], [w, h], [0, h], [0, 0]], dtype=float)
    interiors = []
    if hole:
        interiors = [np.array([[w / 3, h / 3], [2 * w / 3, h / 3], [2 * w / 3, 2 * h / 3], [w / 3, 2 * h / 3], [w / 3, h / 3]])]
    return Polygon(ring, interiors=interiors)


print("hand-built shapes:")
for label, poly in [
    ("10 x 10 square", rect(10, 10)),
    ("40 x 10 slab", rect(40, 10)),
    ("100 x 5 strip", rect(100, 5)),
    ("30 x 30 courtyard block", rect(30, 30, hole=True)),
]:
    m = min_bounding_rect(poly)
    form = classify_polygon(poly, cfg)
    print(f"  {label:24s} AR {m.aspect_ratio:5.2f}  holes {len(poly.interiors)}  -> {form.value}")

inputs = {k: REPO / v for k, v in cfg.inputs.items()}
ds = parse_layers(inputs, cfg)
assign_buildings_to_plots(ds)
run_forms(ds, cfg)

counts = Counter(b.form_type.value for b in ds.buildings)
print(f"\nsynthetic town ({len(ds.buildings)} buildings):")
for form, n in counts.most_common():
    print(f"  {form:16s} {n:4d}  ({n / len(ds.buildings):.0%})")

o = [b.orientation for b in ds.buildings if b.orientation is not None]
print(f"\norientation range: {min(o):.1f} to {max(o):.1f} degrees from north (positive-northing fold)")
