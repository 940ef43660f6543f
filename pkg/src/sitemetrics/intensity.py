"""Land-use intensity: floor area ratio and building coverage ratio.

BCR above 1.0 marks a data-inconsistency outlier (footprints overlapping
the plot boundary, double-counted canopies and the like). Outliers stay in
the per-plot output but aggregate medians exclude them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import IndicatorConfig
from .records import BuildingRecord, Dataset, PlotRecord


@dataclass
class IntensityResult:
    far: float
    bcr: float
    bcr_outlier: bool
    floors_estimated: int  # buildings whose floor count used the fallback


def effective_floors(b: BuildingRecord, cfg: IndicatorConfig) -> tuple[int, bool]:
    """(floors, estimated) with the storey-height fallback.

    Explicit floor counts win; otherwise height / storey_height rounded
    half-up (minimum 1); otherwise a single floor. `estimated` is True
    whenever the explicit count was absent.
    """
    if b.num_floors is not None:
        return b.num_floors, False
    if b.height is not None:
        return max(1, int(math.floor(b.height / cfg.storey_height_m + 0.5))), True
    return 1, True


def floor_area_ratio(
    plot: PlotRecord, buildings: list[BuildingRecord], cfg: IndicatorConfig
) -> tuple[float, int]:
    """(FAR, number of buildings whose floor count was estimated)."""
    if not plot.plot_area or plot.plot_area <= 0:
        raise ValueError(f"plot {plot.mp_name} has non-positive area")
    total = 0.0
    estimated = 0
    for b in buildings:
        if b.plot_id != plot.mp_name:
            continue
        floors, est = effective_floors(b, cfg)
        estimated += est
        total += (b.foot_area or 0.0) * floors
    return total / plot.plot_area, estimated


def building_coverage_ratio(plot: PlotRecord, buildings: list[BuildingRecord]) -> tuple[float, bool]:
    """(BCR as a ratio, outlier flag). Outlier iff BCR > 1.0."""
    if not plot.plot_area or plot.plot_area <= 0:
        raise ValueError(f"plot {plot.mp_name} has non-positive area")
    footprint = sum((b.foot_area or 0.0) for b in buildings if b.plot_id == plot.mp_name)
    bcr = footprint / plot.plot_area
    return bcr, bcr > 1.0


def compute_intensity(plot: PlotRecord, buildings: list[BuildingRecord], cfg: IndicatorConfig) -> IntensityResult:
    far, estimated = floor_area_ratio(plot, buildings, cfg)
    bcr, outlier = building_coverage_ratio(plot, buildings)
    return IntensityResult(far=far, bcr=bcr, bcr_outlier=outlier, floors_estimated=estimated)


def run_intensity(ds: Dataset, cfg: IndicatorConfig) -> Dataset:
    for plot in ds.plots:
        result = compute_intensity(plot, ds.buildings, cfg)
        plot.far = result.far
        plot.bcr = result.bcr
        plot.bcr_outlier = result.bcr_outlier
    return ds
