"""Building function completion over a typed-edge building graph.

Buildings become nodes with morphology + POI-context + land-use features
and two edge relations: sharing a plot, and spatial adjacency under an
adaptive per-plot distance threshold. A relational graph classifier
(rgcn module) predicts the level-2 type code for unlabeled buildings;
rule-based refinement then derives level-3 functions (corridors and
POI-anchored special uses) and rolls level-2 codes up to level-1
categories through an editable mapping table.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import rgcn
from .config import IndicatorConfig
from .geometry import mbr_of_points, point_polygon_distance, polygon_distance
from .records import BuildingRecord, Dataset
from .spatial import SpatialIndex

logger = logging.getLogger(__name__)

RELATION_NAMES = ("same_plot", "spatial_neighbor")
NO_PLOT_LANDUSE = "__none__"


# ---------------------------------------------------------------------------
# Level mapping table
# ---------------------------------------------------------------------------

def load_level_map(path: str | Path | None = None) -> dict[str, dict[str, str]]:
    """code -> {"type": level-2 name, "category": level-1 name}."""
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = resources.files("sitemetrics.data").joinpath("function_levels.json").read_text("utf-8")
    return json.loads(text)["codes"]


def derive_level1(level2_code: str, mapping: dict[str, dict[str, str]]) -> str:
    entry = mapping.get(level2_code)
    if entry is None:
        logger.warning("unknown level-2 code %r, mapping to Unclassified", level2_code)
        return "Unclassified"
    return entry["category"]


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------

@dataclass
class RelGraph:
    node_ids: list[str]
    features: np.ndarray  # (N, F), standardized
    relations: dict[str, list[tuple[int, int]]]  # directed edge lists, symmetric
    labels: np.ndarray  # (N,) class index or -1
    classes: list[str]  # level-2 codes
    feature_meta: dict

    @property
    def adjacency(self) -> list[rgcn.Relation]:
        n = len(self.node_ids)
        return [rgcn.Relation.from_edges(n, self.relations[name]) for name in RELATION_NAMES]


def _median_nn_distance(points: np.ndarray) -> float | None:
    if len(points) < 2:
        return None
    diff = points[:, None, :] - points[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(d, np.inf)
    return float(np.median(d.min(axis=1)))


def _neighbor_thresholds(ds: Dataset, centroids: np.ndarray, cfg: IndicatorConfig) -> np.ndarray:
    """Per-building spatial-neighbor distance threshold, clamped to [min, max]."""
    by_plot: dict[str | None, list[int]] = {}
    for i, b in enumerate(ds.buildings):
        by_plot.setdefault(b.plot_id, []).append(i)

    global_med = _median_nn_distance(centroids)
    fallback = cfg.neighbor_min_m if global_med is None else global_med

    thresholds = np.empty(len(ds.buildings))
    for plot_id, idxs in by_plot.items():
        med = _median_nn_distance(centroids[idxs]) if plot_id is not None else None
        base = med if med is not None else fallback
        t = min(max(cfg.neighbor_scale * base, cfg.neighbor_min_m), cfg.neighbor_max_m)
        thresholds[idxs] = t
    return thresholds


def _poi_category_counts(ds: Dataset, centroids: np.ndarray, cfg: IndicatorConfig) -> tuple[np.ndarray, list[str]]:
    from .access import normalize_category

    categories = sorted(cfg.facility_weights)
    counts = np.zeros((len(centroids), len(categories)))
    if not ds.pois:
        return counts, categories
    col = {c: k for k, c in enumerate(categories)}
    locs = np.array([p.location for p in ds.pois])
    cats = [normalize_category(p.category, cfg) for p in ds.pois]
    r = cfg.poi_context_radius_m
    for i, c in enumerate(centroids):
        d = np.hypot(locs[:, 0] - c[0], locs[:, 1] - c[1])
        for j in np.flatnonzero(d <= r):
            cat = cats[j]
            if cat is not None:
                counts[i, col[cat]] += 1
    return counts, categories


def build_relgraph(ds: Dataset, cfg: IndicatorConfig, feature_meta: dict | None = None) -> RelGraph:
    """Typed-edge graph with standardized node features.

    Pass the `feature_meta` of a trained checkpoint to reproduce its
    feature layout and normalization on a new dataset (land uses unseen at
    training time get an all-zero one-hot).
    """
    if not ds.buildings:
        raise ValueError("cannot build a building graph from zero buildings")

    n = len(ds.buildings)
    centroids = np.array([b.centroid() for b in ds.buildings])

    # --- relations -----------------------------------------------------------
    same_plot: list[tuple[int, int]] = []
    by_plot: dict[str, list[int]] = {}
    for i, b in enumerate(ds.buildings):
        if b.plot_id is not None:
            by_plot.setdefault(b.plot_id, []).append(i)
    for idxs in by_plot.values():
        for a in range(len(idxs)):
            for b_ in range(a + 1, len(idxs)):
                same_plot.append((idxs[a], idxs[b_]))
                same_plot.append((idxs[b_], idxs[a]))

    thresholds = _neighbor_thresholds(ds, centroids, cfg)
    spatial: list[tuple[int, int]] = []
    diff = centroids[:, None, :] - centroids[None, :, :]
    dists = np.hypot(diff[..., 0], diff[..., 1])
    for i in range(n):
        for j in range(i + 1, n):
            if dists[i, j] <= max(thresholds[i], thresholds[j]):
                spatial.append((i, j))
                spatial.append((j, i))

    # --- features --------------------------------------------------------------
    landuse_by_plot = {p.mp_name: p.land_use for p in ds.plots}
    if feature_meta is not None:
        landuses = list(feature_meta["landuse_vocab"])
    else:
        landuses = sorted(
            {landuse_by_plot.get(b.plot_id, NO_PLOT_LANDUSE) if b.plot_id else NO_PLOT_LANDUSE for b in ds.buildings}
        )
    lu_col = {lu: k for k, lu in enumerate(landuses)}

    poi_counts, poi_categories = _poi_category_counts(ds, centroids, cfg)

    cols = []
    for i, b in enumerate(ds.buildings):
        area = max(b.foot_area or 0.0, 1e-9)
        height = b.height if b.height is not None else 0.0
        missing = 1.0 if b.height is None else 0.0
        compact = (b.perimeter or 0.0) / math.sqrt(area)
        pts = np.vstack([p.exterior[:-1] for p in b.parts])
        ar = mbr_of_points(pts).aspect_ratio
        onehot = np.zeros(len(landuses))
        lu = landuse_by_plot.get(b.plot_id, NO_PLOT_LANDUSE) if b.plot_id else NO_PLOT_LANDUSE
        if lu in lu_col:
            onehot[lu_col[lu]] = 1.0
        cols.append(np.concatenate([[math.log(area), height, missing, compact, ar], poi_counts[i], onehot]))
    raw = np.array(cols)

    if feature_meta is not None:
        mean = np.array(feature_meta["mean"])
        safe_std = np.array(feature_meta["std"])
    else:
        mean = raw.mean(axis=0)
        std = raw.std(axis=0)
        safe_std = np.where(std > 1e-12, std, 1.0)
    features = (raw - mean) / safe_std

    # --- labels ------------------------------------------------------------------
    classes = sorted({b.level2_code for b in ds.buildings if b.level2_code})
    class_idx = {c: k for k, c in enumerate(classes)}
    labels = np.array([class_idx.get(b.level2_code, -1) if b.level2_code else -1 for b in ds.buildings])

    feature_meta = {
        "mean": mean.tolist(),
        "std": safe_std.tolist(),
        "landuse_vocab": landuses,
        "poi_categories": poi_categories,
        "feature_names": ["log_foot_area", "height", "height_missing", "compactness", "aspect_ratio"]
        + [f"poi_{c}" for c in poi_categories]
        + [f"landuse_{lu}" for lu in landuses],
    }
    return RelGraph(
        node_ids=[b.id for b in ds.buildings],
        features=features,
        relations={"same_plot": same_plot, "spatial_neighbor": spatial},
        labels=labels,
        classes=classes,
        feature_meta=feature_meta,
    )


# ---------------------------------------------------------------------------
# Train / predict over a dataset
# ---------------------------------------------------------------------------

def train_on_dataset(ds: Dataset, cfg: IndicatorConfig) -> tuple[rgcn.RgcnModel, rgcn.TrainReport, RelGraph]:
    graph = build_relgraph(ds, cfg)
    model, report = rgcn.train(
        graph.features,
        graph.adjacency,
        graph.labels,
        graph.classes,
        hidden=cfg.rgcn_hidden,
        layers=cfg.rgcn_layers,
        dropout=cfg.rgcn_dropout,
        lr=cfg.rgcn_lr,
        epochs=cfg.rgcn_epochs,
        folds=cfg.rgcn_folds,
        seed=cfg.seed,
    )
    return model, report, graph


def predict_level2(
    ds: Dataset,
    model: rgcn.RgcnModel,
    graph: RelGraph,
    mapping: dict[str, dict[str, str]],
    classes: list[str] | None = None,
) -> int:
    """Fill missing level-2 codes from the classifier; never overwrite labels.

    Returns the number of buildings filled.
    """
    classes = classes if classes is not None else graph.classes
    proba = rgcn.predict_proba(model, graph.features, graph.adjacency)
    pred = np.argmax(proba, axis=1)
    filled = 0
    for i, b in enumerate(ds.buildings):
        if b.level2_code:
            entry = mapping.get(b.level2_code)
            if entry and not b.level2:
                b.level2 = entry["type"]
            continue
        code = classes[pred[i]]
        b.level2_code = code
        b.level2 = mapping[code]["type"] if code in mapping else code
        b.confidence = float(proba[i, pred[i]])
        b.predicted = True
        filled += 1
    return filled


# ---------------------------------------------------------------------------
# Level-3 refinement and level-1 rollup
# ---------------------------------------------------------------------------

def _touch_count(ds: Dataset, index: SpatialIndex, i: int, max_dist: float) -> int:
    b = ds.buildings[i]
    x0, y0, x1, y1 = b.bounds()
    count = 0
    for j in index.query((x0 - max_dist, y0 - max_dist, x1 + max_dist, y1 + max_dist)):
        if j == i:
            continue
        other = ds.buildings[j]
        d = min(polygon_distance(pa, pb) for pa in b.parts for pb in other.parts)
        if d <= max_dist:
            count += 1
    return count


def _is_corridor(b: BuildingRecord, cfg: IndicatorConfig) -> bool:
    pts = np.vstack([p.exterior[:-1] for p in b.parts])
    mbr = mbr_of_points(pts)
    return mbr.aspect_ratio > cfg.corridor_min_ar and mbr.width < cfg.corridor_max_width_m


def _poi_rule_label(b: BuildingRecord, ds: Dataset, cfg: IndicatorConfig) -> str | None:
    for rule in cfg.refine_rules:
        keywords = [k.lower() for k in rule.get("keywords", [])]
        for poi in ds.pois:
            cat = poi.category.lower()
            if not any(k in cat for k in keywords):
                continue
            d = min(point_polygon_distance(poi.location, part) for part in b.parts)
            if d <= cfg.refine_poi_radius_m:
                return rule["label"]
    return None


def refine_level3(ds: Dataset, cfg: IndicatorConfig) -> Dataset:
    """Derive level-3 function labels from level-2 plus geometry/POI rules."""
    index = SpatialIndex([b.bounds() for b in ds.buildings])
    for i, b in enumerate(ds.buildings):
        if not b.level2:
            continue
        if _is_corridor(b, cfg) and _touch_count(ds, index, i, cfg.corridor_touch_dist_m) >= cfg.corridor_min_touches:
            b.level3 = f"{b.level2}-corridor"
            continue
        label = _poi_rule_label(b, ds, cfg)
        b.level3 = label if label is not None else b.level2
    return ds


def rollup_level1(ds: Dataset, mapping: dict[str, dict[str, str]]) -> Dataset:
    for b in ds.buildings:
        if b.level2_code:
            b.level1 = derive_level1(b.level2_code, mapping)
    return ds


def run_functions(ds: Dataset, cfg: IndicatorConfig, checkpoint_path: str | Path | None = None):
    """Full function stage: train, predict, refine, roll up.

    Returns (dataset, TrainReport). Writes a model checkpoint when a path
    is given.
    """
    mapping = load_level_map(cfg.level_map_path)
    model, report, graph = train_on_dataset(ds, cfg)
    predict_level2(ds, model, graph, mapping)
    refine_level3(ds, cfg)
    rollup_level1(ds, mapping)
    if checkpoint_path is not None:
        rgcn.save_checkpoint(checkpoint_path, model, graph.classes, graph.feature_meta)
    return ds, report
