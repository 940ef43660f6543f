"""Plot layout pattern classification.

A plot with two or more candidate buildings gets exactly one of seven
patterns from a fixed-order rule cascade; symmetry rules are tested first,
the flexible layout is the fallback. Plots with fewer than two candidates
after filtering get a null pattern.

Candidate lists are sorted by building id before any matching, so results
are independent of input order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import IndicatorConfig
from .geometry import GeometryError, convex_hull, mbr_of_points
from .records import BuildingRecord, Dataset, LayoutPattern, PlotRecord


@dataclass
class Candidate:
    id: str
    centroid: np.ndarray  # (2,)
    area: float
    aspect_ratio: float


@dataclass
class SymmetryMatch:
    axis_point: tuple[float, float]
    axis_dir: tuple[float, float]  # unit vector
    pairs: list[tuple[str, str]]
    self_matched: list[str]
    matched_fraction: float
    max_centroid_offset: float  # fraction of plot diameter
    worst_area_ratio: float

    @property
    def matched_count(self) -> int:
        return 2 * len(self.pairs) + len(self.self_matched)


def make_candidates(buildings: list[BuildingRecord]) -> list[Candidate]:
    out = []
    for b in sorted(buildings, key=lambda x: x.id):
        pts = np.vstack([p.exterior[:-1] for p in b.parts])
        out.append(
            Candidate(
                id=b.id,
                centroid=np.asarray(b.centroid()),
                area=float(b.foot_area or 0.0),
                aspect_ratio=mbr_of_points(pts).aspect_ratio,
            )
        )
    return out


def filter_candidates(
    plot: PlotRecord, buildings: list[BuildingRecord], cfg: IndicatorConfig
) -> list[BuildingRecord]:
    """Keep buildings large enough to shape the layout; drop transport types."""
    excluded = {e.strip().lower() for e in cfg.layout_transport_exclusions}
    kept = []
    for b in buildings:
        if b.plot_id != plot.mp_name:
            continue
        if (b.foot_area or 0.0) < cfg.layout_min_area:
            continue
        if b.level2 and b.level2.strip().lower() in excluded:
            continue
        kept.append(b)
    return sorted(kept, key=lambda b: b.id)


# ---------------------------------------------------------------------------
# Symmetry detection
# ---------------------------------------------------------------------------

def _reflect(points: np.ndarray, origin: np.ndarray, direction: np.ndarray) -> np.ndarray:
    v = points - origin
    proj = v @ direction
    return origin + 2.0 * np.outer(proj, direction) - v


def _principal_direction(centroids: np.ndarray) -> np.ndarray | None:
    centered = centroids - centroids.mean(axis=0)
    cov = centered.T @ centered
    if not np.any(np.abs(cov) > 1e-12):
        return None
    eigvals, eigvecs = np.linalg.eigh(cov)
    return eigvecs[:, int(np.argmax(eigvals))]


def _candidate_axes(cands: list[Candidate], max_pair_n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    centroids = np.array([c.centroid for c in cands])
    mean = centroids.mean(axis=0)
    axes: list[tuple[np.ndarray, np.ndarray]] = []
    principal = _principal_direction(centroids)
    if principal is not None:
        axes.append((mean, principal))
        axes.append((mean, np.array([-principal[1], principal[0]])))
    if len(cands) <= max_pair_n:
        for i in range(len(cands)):
            for j in range(i + 1, len(cands)):
                delta = cands[j].centroid - cands[i].centroid
                norm = float(np.hypot(*delta))
                if norm < 1e-12:
                    continue
                d = delta / norm
                mid = (cands[i].centroid + cands[j].centroid) / 2.0
                axes.append((mid, np.array([-d[1], d[0]])))
    return axes


def _match_axis(
    cands: list[Candidate],
    origin: np.ndarray,
    direction: np.ndarray,
    tol_offset_abs: float,
    tol_area: float,
) -> SymmetryMatch:
    centroids = np.array([c.centroid for c in cands])
    reflected = _reflect(centroids, origin, direction)
    unmatched = list(range(len(cands)))
    pairs: list[tuple[str, str]] = []
    selfm: list[str] = []
    offsets: list[float] = []
    ratios: list[float] = []

    for i in range(len(cands)):
        if i not in unmatched:
            continue
        r = reflected[i]
        # nearest unmatched counterpart, itself included; ties by id order
        j = min(unmatched, key=lambda k: (float(np.hypot(*(r - centroids[k]))), k))
        dist = float(np.hypot(*(r - centroids[j])))
        if j == i:
            if dist <= tol_offset_abs:
                selfm.append(cands[i].id)
                offsets.append(dist)
                unmatched.remove(i)
        else:
            ratio = max(cands[i].area, cands[j].area) / max(min(cands[i].area, cands[j].area), 1e-12)
            if dist <= tol_offset_abs and ratio <= tol_area:
                pairs.append((cands[i].id, cands[j].id))
                offsets.append(dist)
                ratios.append(ratio)
                unmatched.remove(i)
                unmatched.remove(j)
        # a failed nearest match leaves the building unmatched (greedy)

    return SymmetryMatch(
        axis_point=(float(origin[0]), float(origin[1])),
        axis_dir=(float(direction[0]), float(direction[1])),
        pairs=pairs,
        self_matched=selfm,
        matched_fraction=(2 * len(pairs) + len(selfm)) / len(cands),
        max_centroid_offset=max(offsets) if offsets else 0.0,
        worst_area_ratio=max(ratios) if ratios else 1.0,
    )


def detect_symmetry(
    cands: list[Candidate],
    plot_diameter: float,
    tol_offset: float,
    tol_area: float,
    min_fraction: float,
    max_pair_axis_n: int = 12,
) -> SymmetryMatch | None:
    """Best mirror-symmetry match over the candidate axes, or None.

    An axis qualifies only when it produces at least one mirrored pair
    (self-matches alone describe collinearity, not symmetry) and its
    matched fraction reaches `min_fraction`. Offsets are normalized by the
    plot diameter inside the returned match.
    """
    if len(cands) < 2 or plot_diameter <= 0:
        return None
    tol_offset_abs = tol_offset * plot_diameter
    best: SymmetryMatch | None = None
    for origin, direction in _candidate_axes(cands, max_pair_axis_n):
        match = _match_axis(cands, origin, direction, tol_offset_abs, tol_area)
        if not match.pairs or match.matched_fraction < min_fraction:
            continue
        match.max_centroid_offset /= plot_diameter
        if best is None or (match.matched_fraction, -match.max_centroid_offset) > (
            best.matched_fraction,
            -best.max_centroid_offset,
        ):
            best = match
    return best


# ---------------------------------------------------------------------------
# Rule cascade
# ---------------------------------------------------------------------------

def _hull_aspect_ratio(buildings: list[BuildingRecord]) -> float | None:
    pts = np.vstack([p.exterior[:-1] for b in buildings for p in b.parts])
    try:
        hull = convex_hull(pts)
    except GeometryError:
        return None
    return mbr_of_points(hull).aspect_ratio


def _radial_cv(cands: list[Candidate]) -> float | None:
    centroids = np.array([c.centroid for c in cands])
    mean = centroids.mean(axis=0)
    radii = np.hypot(*(centroids - mean).T)
    mean_r = float(radii.mean())
    if mean_r <= 1e-12:
        return None
    return float(radii.std() / mean_r)


def _principal_variance_share(cands: list[Candidate]) -> float | None:
    centroids = np.array([c.centroid for c in cands])
    centered = centroids - centroids.mean(axis=0)
    cov = centered.T @ centered
    eigvals = np.linalg.eigvalsh(cov)
    total = float(eigvals.sum())
    if total <= 1e-12:
        return None
    return float(eigvals.max() / total)


def _uniform_ar_deviation(cands: list[Candidate]) -> float:
    ars = np.array([c.aspect_ratio for c in cands])
    med = float(np.median(ars))
    return float(np.max(np.abs(ars - med)) / med)


def cascade_trace(
    plot: PlotRecord, buildings: list[BuildingRecord], cfg: IndicatorConfig
) -> list[tuple[LayoutPattern, bool]]:
    """Evaluate every cascade predicate in priority order.

    Returns (pattern, fired) per rule; classification is the first fired
    entry. Exposed separately so tests can assert that all higher-priority
    predicates are false for a classified fixture.
    """
    cands = make_candidates(buildings)
    n = len(cands)
    diameter = plot.diameter()

    absolute = detect_symmetry(
        cands, diameter, cfg.layout_abs_offset, cfg.layout_abs_area_ratio,
        min_fraction=1.0, max_pair_axis_n=cfg.layout_pair_axis_max_n,
    )
    approx = detect_symmetry(
        cands, diameter, cfg.layout_approx_offset, cfg.layout_approx_area_ratio,
        min_fraction=cfg.layout_approx_min_fraction, max_pair_axis_n=cfg.layout_pair_axis_max_n,
    )

    centripetal = False
    if n >= cfg.layout_centripetal_min_n:
        hull_ar = _hull_aspect_ratio(buildings)
        cv = _radial_cv(cands)
        centripetal = (
            hull_ar is not None
            and hull_ar <= cfg.layout_centripetal_max_hull_ar
            and cv is not None
            and cv <= cfg.layout_centripetal_max_radial_cv
        )

    axis_guided = False
    if n >= cfg.layout_axis_min_n:
        share = _principal_variance_share(cands)
        axis_guided = share is not None and share >= cfg.layout_axis_min_variance

    uniform = _uniform_ar_deviation(cands) <= cfg.layout_uniform_max_ar_dev

    mixed = False
    if approx is None:  # full set failed the approximate test
        required = max(cfg.layout_mixed_min_count, math.ceil(cfg.layout_mixed_min_share * n))
        if required <= n:
            partial = detect_symmetry(
                cands, diameter, cfg.layout_approx_offset, cfg.layout_approx_area_ratio,
                min_fraction=required / n, max_pair_axis_n=cfg.layout_pair_axis_max_n,
            )
            mixed = partial is not None and partial.matched_count >= required

    return [
        (LayoutPattern.ABSOLUTE_SYMMETRY, absolute is not None),
        (LayoutPattern.APPROXIMATE_SYMMETRY, approx is not None),
        (LayoutPattern.CENTRIPETAL, centripetal),
        (LayoutPattern.AXIS_GUIDED, axis_guided),
        (LayoutPattern.UNIFORM_FORM, uniform),
        (LayoutPattern.MIXED, mixed),
        (LayoutPattern.FLEXIBLE, True),
    ]


def classify_layout(
    plot: PlotRecord, buildings: list[BuildingRecord], cfg: IndicatorConfig
) -> LayoutPattern | None:
    """First matching pattern in the cascade; None for <= 1 candidate."""
    if len(buildings) <= 1:
        return None
    for pattern, fired in cascade_trace(plot, buildings, cfg):
        if fired:
            return pattern
    raise AssertionError("cascade has no fallback")  # unreachable


def run_layouts(ds: Dataset, cfg: IndicatorConfig) -> Dataset:
    for plot in ds.plots:
        cands = filter_candidates(plot, ds.buildings, cfg)
        plot.layout_pattern = classify_layout(plot, cands, cfg)
        plot.layout_assigned = True
    return ds
