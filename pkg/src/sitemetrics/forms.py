"""Building form classification from footprint geometry.

A footprint with any interior ring is an Enclosed Form regardless of shape;
otherwise the minimum-bounding-rectangle aspect ratio decides: Point up to
the first threshold, Slab up to the second, Line-like Slab beyond. Boundary
values fall to the lower class.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .config import IndicatorConfig
from .geometry import (
    Polygon,
    mbr_of_points,
    min_bounding_rect,
    orientation_from_mbr,
    polygon_area,
)
from .records import BuildingRecord, Dataset, FormType


# boundary aspect ratios belong to the lower class; the relative guard keeps
# that true when rotation/translation round-off perturbs the computed ratio
_AR_EPS = 1e-9


def classify_polygon(poly: Polygon, cfg: IndicatorConfig) -> FormType:
    if poly.interiors:
        return FormType.ENCLOSED_FORM
    ar = min_bounding_rect(poly).aspect_ratio
    if ar <= cfg.form_point_max_ar * (1.0 + _AR_EPS):
        return FormType.POINT
    if ar <= cfg.form_slab_max_ar * (1.0 + _AR_EPS):
        return FormType.SLAB
    return FormType.LINE_LIKE_SLAB


def dominant_form(parts: list[Polygon], cfg: IndicatorConfig) -> FormType:
    """Modal form over the parts; ties go to the largest-area part's class."""
    if not parts:
        raise ValueError("dominant_form needs at least one part")
    forms = [classify_polygon(p, cfg) for p in parts]
    counts = Counter(forms)
    top = max(counts.values())
    tied = {f for f, c in counts.items() if c == top}
    if len(tied) == 1:
        return next(iter(tied))
    largest = max(
        (p for p, f in zip(parts, forms) if f in tied),
        key=polygon_area,
    )
    return classify_polygon(largest, cfg)


def classify_form(building: BuildingRecord, cfg: IndicatorConfig) -> FormType:
    if len(building.parts) == 1:
        return classify_polygon(building.parts[0], cfg)
    return dominant_form(building.parts, cfg)


def run_forms(ds: Dataset, cfg: IndicatorConfig) -> Dataset:
    """Fill form_type and orientation for every building."""
    for b in ds.buildings:
        b.form_type = classify_form(b, cfg)
        # orientation uses the bounding rectangle of the whole footprint
        pts = np.vstack([p.exterior[:-1] for p in b.parts])
        b.orientation = orientation_from_mbr(mbr_of_points(pts))
    return ds
