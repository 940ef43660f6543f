"""Dataset assembly: building/plot spatial join and validation report."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import point_in_polygon
from .records import Dataset
from .spatial import SpatialIndex


def assign_buildings_to_plots(ds: Dataset) -> Dataset:
    """Attach each building to the plot containing its centroid.

    Boundary ties (centroid on a shared edge) go to the smallest plot by
    area; a centroid in no plot leaves plot_id unset. Mutates and returns
    the dataset.
    """
    if not ds.plots:
        for b in ds.buildings:
            b.plot_id = None
        return ds

    index = SpatialIndex([p.bounds() for p in ds.plots])
    for b in ds.buildings:
        cx, cy = b.centroid()
        hits = [
            ds.plots[i]
            for i in index.query_point(cx, cy)
            if point_in_polygon((cx, cy), ds.plots[i].geometry, boundary=True)
        ]
        if not hits:
            b.plot_id = None
        else:
            hits.sort(key=lambda p: (p.plot_area, p.mp_name))
            b.plot_id = hits[0].mp_name
    return ds


@dataclass
class ValidationReport:
    duplicate_building_ids: list[str] = field(default_factory=list)
    duplicate_plot_names: list[str] = field(default_factory=list)
    zero_area_buildings: list[str] = field(default_factory=list)
    zero_area_plots: list[str] = field(default_factory=list)
    missing_height: list[str] = field(default_factory=list)
    missing_floors: list[str] = field(default_factory=list)
    unassigned_buildings: list[str] = field(default_factory=list)

    def is_clean(self) -> bool:
        return not any(v for v in vars(self).values())

    def to_dict(self) -> dict:
        return {k: list(v) for k, v in vars(self).items()}


def validate(ds: Dataset) -> ValidationReport:
    """Non-mutating data quality scan over a parsed dataset.

    Buildings flagged under missing_height/missing_floors fall back to the
    storey-height floor estimate during the intensity stage.
    """
    report = ValidationReport()

    seen: set[str] = set()
    for b in ds.buildings:
        if b.id in seen:
            report.duplicate_building_ids.append(b.id)
        seen.add(b.id)
        if not b.foot_area or b.foot_area <= 0:
            report.zero_area_buildings.append(b.id)
        if b.height is None:
            report.missing_height.append(b.id)
        if b.num_floors is None:
            report.missing_floors.append(b.id)
        if b.plot_id is None:
            report.unassigned_buildings.append(b.id)

    seen_plots: set[str] = set()
    for p in ds.plots:
        if p.mp_name in seen_plots:
            report.duplicate_plot_names.append(p.mp_name)
        seen_plots.add(p.mp_name)
        if not p.plot_area or p.plot_area <= 0:
            report.zero_area_plots.append(p.mp_name)
    return report
