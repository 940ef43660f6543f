"""Walk the seven-pattern layout cascade over archetype plots.

Each archetype shows the first rule that fires and why the ones above it
did not. The cascade order is fixed: absolute symmetry, approximate
symmetry, centripetal, axis-guided, uniform form, mixed, flexible.
"""

from collections import Counter
from pathlib import Path

import numpy as np

from sitemetrics.config import IndicatorConfig
from sitemetrics.geometry import Polygon
from sitemetrics.layout import cascade_trace, classify_layout, detect_symmetry, filter_candidates, make_candidates, run_layouts
from sitemetrics.records import BuildingRecord, PlotRecord

REPO = Path(__file__).resolve().parents[1]
cfg = IndicatorConfig(crs="projected")


def plot100():
    ring = np.array([[0, 0], [100, 0], [100, 100], [0, 100], [0, 0]], dtype=float)
    p = PlotRecord(mp_name="P", land_use="X", subzone="Z", geometry=Polygon(ring))
    p.compute_morphology()
    return p


def bld(bid, cx, cy, w, h):
    ring = np.array(
        [[cx - w / 2, cy - h / 2], [cx + w / 2, cy - h / 2], [cx + w / 2, cy + h / 2], [cx - w / 2, cy + h / 2], [cx - w / 2, cy - h / 2]],
        dtype=float,
    )
    b = BuildingRecord(id=bid, parts=[Polygon(ring)])
    b.compute_morphology()
    b.plot_id = "P"
    return b


def mirrored_estate():
    bs = []
    for row in range(4):
        cy = 15 + row * 22
        bs.append(bld(f"l{row}", 30, cy, 26, 10))
        bs.append(bld(f"r{row}", 70, cy, 26, 10))
    return bs


def ring_cluster():
    bs = []
    jitter = [-5, 5, 7, 7, -18, 4, 10, 13]
    areas = [105, 78, 75, 89, 126, 98, 124, 98]
    for k, (j, a) in enumerate(zip(jitter, areas)):
        ang = np.radians(45 * k + j)
        s = np.sqrt(a)
        bs.append(bld(f"c{k}", 50 + 32 * np.cos(ang), 50 + 32 * np.sin(ang), s, s))
    return bs


def strung_along_road():
    bs = []
    for k, (x, a) in enumerate(zip([5, 20, 42, 78, 95], [60, 140, 90, 200, 120])):
        s = np.sqrt(a)
        bs.append(bld(f"a{k}", x, 30 + 0.04 * x, s * 1.4, s / 1.4))
    return bs


for name, builder in [
    ("mirrored HDB estate", mirrored_estate),
    ("ring around a court", ring_cluster),
    ("strung along a road", strung_along_road),
]:
    plot = plot100()
    bs = builder()
    pattern = classify_layout(plot, bs, cfg)
    print(f"{name}: {pattern.value}")
    for rule, fired in cascade_trace(plot, bs, cfg):
        marker = "->" if rule is pattern else ("  " if not fired else " *")
        print(f"   {marker} {rule.value:22s} {'fires' if fired else 'does not fire'}")
        if rule is pattern:
            break

# symmetry scoring detail for the estate
bs = mirrored_estate()
match = detect_symmetry(make_candidates(bs), plot100().diameter(), tol_offset=0.05, tol_area=1.05, min_fraction=1.0)
print(f"\nestate symmetry: {len(match.pairs)} pairs, {len(match.self_matched)} on-axis, "
      f"matched fraction {match.matched_fraction:.2f}, worst area ratio {match.worst_area_ratio:.3f}")

# and over the whole bundled town
from sitemetrics.geojson_io import parse_layers
from sitemetrics.ingest import assign_buildings_to_plots

town_cfg = IndicatorConfig.from_file(REPO / "data/synthetic_town/config.json")
ds = parse_layers({k: REPO / v for k, v in town_cfg.inputs.items()}, town_cfg)
assign_buildings_to_plots(ds)
run_layouts(ds, town_cfg)
counts = Counter(p.layout_pattern.value if p.layout_pattern else "null" for p in ds.plots)
print(f"\nsynthetic town plot patterns: {dict(counts)}")
