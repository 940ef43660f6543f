"""Functional mix per plot: category area ratios and the Simpson index."""

from __future__ import annotations

from .config import IndicatorConfig
from .records import BuildingRecord, Dataset, PlotRecord

UNCLASSIFIED = "unclassified"


def _category(b: BuildingRecord, cfg: IndicatorConfig) -> str:
    if cfg.diversity_level == "level3":
        label = b.level3
    else:
        # the level-2 code is the canonical category key; the type name is
        # only its human-readable alias (and may not be filled yet)
        label = b.level2_code or b.level2
    return label if label else UNCLASSIFIED


def _weight(b: BuildingRecord, cfg: IndicatorConfig) -> float:
    area = b.foot_area or 0.0
    if cfg.diversity_floor_area_weighting:
        from .intensity import effective_floors

        return area * effective_floors(b, cfg)[0]
    return area


def functional_ratios(
    plot: PlotRecord, buildings: list[BuildingRecord], cfg: IndicatorConfig
) -> dict[str, float]:
    """Share of built-up area per function category within one plot.

    Buildings without a category are pooled under "unclassified" rather
    than dropped. Empty plot -> empty map.
    """
    areas: dict[str, float] = {}
    for b in buildings:
        if b.plot_id != plot.mp_name:
            continue
        w = _weight(b, cfg)
        if w <= 0:
            continue
        cat = _category(b, cfg)
        areas[cat] = areas.get(cat, 0.0) + w
    total = sum(areas.values())
    if total <= 0:
        return {}
    return {cat: area / total for cat, area in sorted(areas.items())}


def simpson_index(ratios: dict[str, float]) -> float:
    """SI = 1 - sum(r_i^2); 0 for an empty map (no built area)."""
    return 1.0 - sum(r * r for r in ratios.values()) if ratios else 0.0


def run_diversity(ds: Dataset, cfg: IndicatorConfig) -> Dataset:
    for plot in ds.plots:
        ratios = functional_ratios(plot, ds.buildings, cfg)
        plot.functional_ratios = ratios
        plot.si = simpson_index(ratios)
    return ds
