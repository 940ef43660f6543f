"""Functional ratios and the Simpson index per plot.

FR is each function category's share of the plot's built-up footprint;
SI = 1 - sum(r_i^2) summarizes how evenly those shares are spread: 0 for a
mono-functional plot, approaching 1 - 1/k for k perfectly balanced uses.
"""

from pathlib import Path

from sitemetrics.config import IndicatorConfig
from sitemetrics.diversity import run_diversity, simpson_index
from sitemetrics.funcnet import load_level_map, rollup_level1
from sitemetrics.geojson_io import parse_layers
from sitemetrics.ingest import assign_buildings_to_plots

print("closed-form checks:")
print(f"  one use            -> SI {simpson_index({'a': 1.0}):.4f}")
print(f"  50/50 split        -> SI {simpson_index({'a': 0.5, 'b': 0.5}):.4f}")
print(f"  0.5/0.3/0.2 split  -> SI {simpson_index({'a': 0.5, 'b': 0.3, 'c': 0.2}):.4f}")
print(f"  four equal shares  -> SI {simpson_index({c: 0.25 for c in 'abcd'}):.4f} (= 1 - 1/4)")

REPO = Path(__file__).resolve().parents[1]
cfg = IndicatorConfig.from_file(REPO / "data/synthetic_town/config.json")
ds = parse_layers({k: REPO / v for k, v in cfg.inputs.items()}, cfg)
assign_buildings_to_plots(ds)

# labels come from the level-2 codes shipped with the town
mapping = load_level_map()
for b in ds.buildings:
    if b.level2_code and b.level2_code in mapping:
        b.level2 = mapping[b.level2_code]["type"]
rollup_level1(ds, mapping)

run_diversity(ds, cfg)

def pretty(cat: str) -> str:
    entry = mapping.get(cat)
    return entry["type"][:30] if entry else cat


ranked = sorted(ds.plots, key=lambda p: p.si, reverse=True)
print(f"\nmost mixed plots of {len(ds.plots)} (ratio keys are level-2 codes):")
for p in ranked[:4]:
    shares = ", ".join(f"{pretty(cat)} {r:.2f}" for cat, r in sorted(p.functional_ratios.items(), key=lambda kv: -kv[1]))
    print(f"  {p.mp_name} ({p.land_use}): SI {p.si:.3f}  [{shares}]")

mono = [p for p in ds.plots if p.si == 0.0 and p.functional_ratios]
print(f"\nmono-functional plots: {len(mono)}")
empty = [p for p in ds.plots if not p.functional_ratios]
print(f"plots with no categorized floor space: {len(empty)} (SI reported as 0)")
