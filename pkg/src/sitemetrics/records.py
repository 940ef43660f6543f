"""Domain records for the five input layers and the assembled dataset.

Ingestion produces one immutable Dataset; every downstream stage reads it
and fills in its own computed fields. Fields default to None until the
stage that computes them has run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .geometry import Polygon, parts_area, parts_centroid, parts_perimeter


class FormType(str, Enum):
    POINT = "Point"
    SLAB = "Slab"
    LINE_LIKE_SLAB = "Line-like Slab"
    ENCLOSED_FORM = "Enclosed Form"


class LayoutPattern(str, Enum):
    ABSOLUTE_SYMMETRY = "Absolute Symmetry"
    APPROXIMATE_SYMMETRY = "Approximate Symmetry"
    CENTRIPETAL = "Centripetal Layout"
    AXIS_GUIDED = "Axis-Guided Layout"
    UNIFORM_FORM = "Uniform Form"
    MIXED = "Mixed Layout"
    FLEXIBLE = "Flexible Layout"


@dataclass
class BuildingRecord:
    id: str
    parts: list[Polygon]
    multipart: bool = False  # True if the source geometry was a MultiPolygon
    height: float | None = None
    num_floors: int | None = None
    level1: str | None = None  # building category
    level2: str | None = None  # building type
    level3: str | None = None  # specific building function
    level2_code: str | None = None
    # computed
    foot_area: float | None = None
    perimeter: float | None = None
    orientation: float | None = None
    form_type: FormType | None = None
    plot_id: str | None = None
    ci: float | None = None  # mirrored from the containing plot
    predicted: bool = False
    confidence: float | None = None

    def compute_morphology(self) -> None:
        self.foot_area = parts_area(self.parts)
        self.perimeter = parts_perimeter(self.parts)

    def centroid(self) -> tuple[float, float]:
        return parts_centroid(self.parts)

    def bounds(self) -> tuple[float, float, float, float]:
        boxes = np.array([p.bounds() for p in self.parts])
        return (
            float(boxes[:, 0].min()),
            float(boxes[:, 1].min()),
            float(boxes[:, 2].max()),
            float(boxes[:, 3].max()),
        )

    def has_interior_ring(self) -> bool:
        return any(p.interiors for p in self.parts)


@dataclass
class PlotRecord:
    mp_name: str
    land_use: str
    subzone: str
    geometry: Polygon
    # computed
    plot_area: float | None = None
    layout_pattern: LayoutPattern | None = None
    layout_assigned: bool = False  # distinguishes "null pattern" from "stage not run"
    functional_ratios: dict[str, float] | None = None
    si: float | None = None
    pta: float | None = None
    ci: float | None = None
    far: float | None = None
    bcr: float | None = None
    bcr_outlier: bool | None = None

    def compute_morphology(self) -> None:
        from .geometry import polygon_area

        self.plot_area = polygon_area(self.geometry)

    def centroid(self) -> tuple[float, float]:
        from .geometry import centroid

        return centroid(self.geometry)

    def bounds(self) -> tuple[float, float, float, float]:
        return self.geometry.bounds()

    def diameter(self) -> float:
        """Diagonal of the axis-aligned bounding box (offset normalizer)."""
        x0, y0, x1, y1 = self.bounds()
        return float(np.hypot(x1 - x0, y1 - y0))


@dataclass
class PoiRecord:
    id: str
    category: str
    location: tuple[float, float]
    rating: float | None = None


@dataclass
class TransitStop:
    id: str
    kind: str  # "bus" or "mrt"
    location: tuple[float, float]


@dataclass
class RoadLine:
    id: str
    coords: np.ndarray  # (n, 2) polyline vertices

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RoadLine):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.coords, other.coords)


@dataclass
class Rejection:
    layer: str
    feature_index: int
    feature_id: str | None
    reason: str


@dataclass
class Dataset:
    buildings: list[BuildingRecord] = field(default_factory=list)
    plots: list[PlotRecord] = field(default_factory=list)
    pois: list[PoiRecord] = field(default_factory=list)
    roads: list[RoadLine] = field(default_factory=list)
    stops: list[TransitStop] = field(default_factory=list)
    rejections: list[Rejection] = field(default_factory=list)

    def plot_by_name(self, mp_name: str) -> PlotRecord | None:
        for p in self.plots:
            if p.mp_name == mp_name:
                return p
        return None

    def buildings_in_plot(self, mp_name: str) -> list[BuildingRecord]:
        return [b for b in self.buildings if b.plot_id == mp_name]
