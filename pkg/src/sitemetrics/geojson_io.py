"""GeoJSON reading/writing for the five input layers and enriched outputs.

Feature-level problems (missing required properties, malformed rings) are
collected as rejections, never raised; unreadable files are fatal. Output
files are written with stable key order and shortest-round-trip floats so
identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .config import IndicatorConfig
from .geometry import GeometryError, Polygon, polygon_area
from .projection import ProjectionError, project_lonlat
from .records import (
    BuildingRecord,
    Dataset,
    FormType,
    LayoutPattern,
    PlotRecord,
    PoiRecord,
    Rejection,
    RoadLine,
    TransitStop,
)

LAYER_NAMES = ("buildings", "plots", "pois", "roads", "stops")


class LayerError(RuntimeError):
    """Fatal input problem: unreadable file or not a FeatureCollection."""


# ---------------------------------------------------------------------------
# Low-level geometry conversion
# ---------------------------------------------------------------------------

def _transform(coords, project: bool):
    pts = []
    for c in coords:
        if not isinstance(c, (list, tuple)) or len(c) < 2:
            raise GeometryError("coordinate is not an [x, y] pair")
        x, y = float(c[0]), float(c[1])
        if not (np.isfinite(x) and np.isfinite(y)):
            raise GeometryError("non-finite coordinate")
        if project:
            x, y = project_lonlat(x, y)
        pts.append((x, y))
    return np.array(pts, dtype=float)


def _parse_ring(coords, project: bool) -> np.ndarray:
    if len(coords) < 4:
        raise GeometryError(f"ring has {len(coords)} positions, needs >= 4")
    return _transform(coords, project)


def _parse_polygon(rings, project: bool) -> Polygon:
    if not rings:
        raise GeometryError("polygon has no rings")
    exterior = _parse_ring(rings[0], project)
    interiors = [_parse_ring(r, project) for r in rings[1:]]
    poly = Polygon(exterior=exterior, interiors=interiors)
    if polygon_area(poly) <= 0:
        raise GeometryError("zero-area polygon")
    return poly


def parse_polygonal(geom: dict, project: bool) -> tuple[list[Polygon], bool]:
    """Parse a Polygon or MultiPolygon geometry into parts."""
    gtype = geom.get("type")
    if gtype == "Polygon":
        return [_parse_polygon(geom.get("coordinates", []), project)], False
    if gtype == "MultiPolygon":
        parts = [_parse_polygon(rings, project) for rings in geom.get("coordinates", [])]
        if not parts:
            raise GeometryError("empty MultiPolygon")
        return parts, True
    raise GeometryError(f"expected Polygon/MultiPolygon, got {gtype}")


def parse_point(geom: dict, project: bool) -> tuple[float, float]:
    if geom.get("type") != "Point":
        raise GeometryError(f"expected Point, got {geom.get('type')}")
    pts = _transform([geom.get("coordinates", [])], project)
    return float(pts[0, 0]), float(pts[0, 1])


def _ring_coords(ring: np.ndarray) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in ring]


def polygon_geometry(parts: list[Polygon], multipart: bool) -> dict:
    if multipart or len(parts) > 1:
        return {
            "type": "MultiPolygon",
            "coordinates": [
                [_ring_coords(p.exterior)] + [_ring_coords(r) for r in p.interiors] for p in parts
            ],
        }
    p = parts[0]
    return {
        "type": "Polygon",
        "coordinates": [_ring_coords(p.exterior)] + [_ring_coords(r) for r in p.interiors],
    }


# ---------------------------------------------------------------------------
# Property helpers
# ---------------------------------------------------------------------------

def _get(props: dict, key: str):
    """Case-insensitive property lookup."""
    if key in props:
        return props[key]
    lowered = key.lower()
    for k, v in props.items():
        if isinstance(k, str) and k.lower() == lowered:
            return v
    return None


def _num(value) -> float | None:
    if value is None or isinstance(value, bool):
        return None
    try:
        v = float(value)
    except (TypeError, ValueError):
        return None
    return v if np.isfinite(v) else None


def _text(value) -> str | None:
    if value is None:
        return None
    s = str(value).strip()
    return s or None


# ---------------------------------------------------------------------------
# Per-layer feature parsers
# ---------------------------------------------------------------------------

def _parse_building(feature: dict, project: bool) -> BuildingRecord:
    props = feature.get("properties") or {}
    bid = _text(_get(props, "id"))
    if bid is None:
        raise ValueError("missing required property 'id'")
    parts, multi = parse_polygonal(feature.get("geometry") or {}, project)

    floors = _num(_get(props, "floors"))
    if floors is None:
        floors = _num(_get(props, "num_floors"))
    rec = BuildingRecord(
        id=bid,
        parts=parts,
        multipart=multi,
        height=_num(_get(props, "height")),
        num_floors=int(floors) if floors is not None else None,
        level2_code=_text(_get(props, "level2_code")),
        level1=_text(_get(props, "Building_Category")),
        level2=_text(_get(props, "Building_Type")),
        level3=_text(_get(props, "Building_Function")),
    )
    if rec.num_floors is not None and rec.num_floors < 1:
        raise ValueError(f"floors must be >= 1, got {rec.num_floors}")
    rec.compute_morphology()

    # enriched fields, present when re-reading engine output
    orient = _num(_get(props, "orientation"))
    if orient is not None:
        rec.orientation = orient
    form = _text(_get(props, "Form_Type"))
    if form is not None:
        rec.form_type = FormType(form)
    rec.plot_id = _text(_get(props, "plot_id"))
    ci = _num(_get(props, "CI"))
    if ci is not None:
        rec.ci = ci
    conf = _num(_get(props, "confidence"))
    if conf is not None:
        rec.confidence = conf
    rec.predicted = bool(_get(props, "predicted") or False)
    return rec


def _parse_plot(feature: dict, project: bool) -> PlotRecord:
    props = feature.get("properties") or {}
    missing = [k for k in ("mp_name", "land_use", "subzone") if _text(_get(props, k)) is None]
    if missing:
        raise ValueError(f"missing required properties {missing}")
    parts, multi = parse_polygonal(feature.get("geometry") or {}, project)
    if multi and len(parts) > 1:
        raise ValueError("plots must be single polygons")
    rec = PlotRecord(
        mp_name=_text(_get(props, "mp_name")),
        land_use=_text(_get(props, "land_use")),
        subzone=_text(_get(props, "subzone")),
        geometry=parts[0],
    )
    rec.compute_morphology()

    if "Layout_Pattern" in props:
        rec.layout_assigned = True
        pattern = props["Layout_Pattern"]
        rec.layout_pattern = LayoutPattern(pattern) if pattern is not None else None
    fr = _get(props, "FR")
    if isinstance(fr, dict):
        rec.functional_ratios = {str(k): float(v) for k, v in fr.items()}
    for attr, key in (("si", "SI"), ("pta", "PTA"), ("ci", "CI"), ("far", "FAR"), ("bcr", "BCR")):
        v = _num(_get(props, key))
        if v is not None:
            setattr(rec, attr, v)
    if "BCR_outlier" in props:
        rec.bcr_outlier = bool(props["BCR_outlier"])
    return rec


def _parse_poi(feature: dict, project: bool, index: int) -> PoiRecord:
    props = feature.get("properties") or {}
    category = _text(_get(props, "category"))
    if category is None:
        raise ValueError("missing required property 'category'")
    loc = parse_point(feature.get("geometry") or {}, project)
    pid = _text(_get(props, "id")) or f"poi_{index}"
    return PoiRecord(id=pid, category=category, location=loc, rating=_num(_get(props, "rating")))


def _parse_stop(feature: dict, project: bool, index: int) -> TransitStop:
    props = feature.get("properties") or {}
    kind = _text(_get(props, "kind"))
    if kind is None:
        raise ValueError("missing required property 'kind'")
    kind = kind.lower()
    if kind not in ("bus", "mrt"):
        raise ValueError(f"kind must be 'bus' or 'mrt', got {kind!r}")
    loc = parse_point(feature.get("geometry") or {}, project)
    sid = _text(_get(props, "id")) or f"stop_{index}"
    return TransitStop(id=sid, kind=kind, location=loc)


def _parse_roads(feature: dict, project: bool, index: int) -> list[RoadLine]:
    props = feature.get("properties") or {}
    rid = _text(_get(props, "id")) or f"road_{index}"
    geom = feature.get("geometry") or {}
    gtype = geom.get("type")
    if gtype == "LineString":
        coords = geom.get("coordinates", [])
        if len(coords) < 2:
            raise GeometryError("LineString needs >= 2 positions")
        return [RoadLine(id=rid, coords=_transform(coords, project))]
    if gtype == "MultiLineString":
        out = []
        for i, coords in enumerate(geom.get("coordinates", [])):
            if len(coords) < 2:
                raise GeometryError("LineString needs >= 2 positions")
            out.append(RoadLine(id=f"{rid}/{i}", coords=_transform(coords, project)))
        if not out:
            raise GeometryError("empty MultiLineString")
        return out
    raise GeometryError(f"expected LineString, got {gtype}")


# ---------------------------------------------------------------------------
# Layer-level parsing
# ---------------------------------------------------------------------------

def _load_collection(path: str | Path) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise LayerError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict) or data.get("type") != "FeatureCollection":
        raise LayerError(f"{path} is not a GeoJSON FeatureCollection")
    return data


def _parse_layer(
    path: str | Path,
    layer: str,
    parse_one: Callable[[dict, int], Any],
    rejections: list[Rejection],
) -> list:
    collection = _load_collection(path)
    out = []
    for i, feature in enumerate(collection.get("features", [])):
        props = feature.get("properties") or {}
        fid = _text(_get(props, "id")) or _text(_get(props, "mp_name"))
        try:
            parsed = parse_one(feature, i)
        except (ValueError, GeometryError, ProjectionError, KeyError) as exc:
            rejections.append(Rejection(layer=layer, feature_index=i, feature_id=fid, reason=str(exc)))
            continue
        if isinstance(parsed, list):
            out.extend(parsed)
        else:
            out.append(parsed)
    return out


def parse_layers(paths: dict[str, str | Path], cfg: IndicatorConfig) -> Dataset:
    """Parse the five input layers into a Dataset.

    `paths` maps layer name (buildings/plots/pois/roads/stops) to a GeoJSON
    file. Invalid features land in Dataset.rejections with a reason.
    """
    missing = [k for k in LAYER_NAMES if k not in paths]
    if missing:
        raise LayerError(f"missing layer paths: {missing}")
    project = cfg.crs == "wgs84"
    rejections: list[Rejection] = []

    ds = Dataset(rejections=rejections)
    ds.buildings = _parse_layer(
        paths["buildings"], "buildings", lambda f, i: _parse_building(f, project), rejections
    )
    ds.plots = _parse_layer(paths["plots"], "plots", lambda f, i: _parse_plot(f, project), rejections)
    ds.pois = _parse_layer(paths["pois"], "pois", lambda f, i: _parse_poi(f, project, i), rejections)
    ds.roads = _parse_layer(paths["roads"], "roads", lambda f, i: _parse_roads(f, project, i), rejections)
    ds.stops = _parse_layer(paths["stops"], "stops", lambda f, i: _parse_stop(f, project, i), rejections)
    return ds


# ---------------------------------------------------------------------------
# Enriched output
# ---------------------------------------------------------------------------

def _clean(props: dict) -> dict:
    return {k: v for k, v in props.items() if v is not None}


def building_properties(b: BuildingRecord) -> dict:
    props = _clean(
        {
            "id": b.id,
            "height": b.height,
            "floors": b.num_floors,
            "level2_code": b.level2_code,
            "Building_Category": b.level1,
            "Building_Type": b.level2,
            "Building_Function": b.level3,
            "foot_area": b.foot_area,
            "perimeter": b.perimeter,
            "orientation": b.orientation,
            "Form_Type": b.form_type.value if b.form_type else None,
            "plot_id": b.plot_id,
            "CI": b.ci,
            "confidence": b.confidence,
        }
    )
    if b.predicted:
        props["predicted"] = True
    return props


def plot_properties(p: PlotRecord) -> dict:
    props = _clean(
        {
            "mp_name": p.mp_name,
            "land_use": p.land_use,
            "subzone": p.subzone,
            "plot_area": p.plot_area,
            "FR": p.functional_ratios,
            "SI": p.si,
            "PTA": p.pta,
            "CI": p.ci,
            "FAR": p.far,
            "BCR": p.bcr,
            "BCR_outlier": p.bcr_outlier,
        }
    )
    if p.layout_assigned:
        props["Layout_Pattern"] = p.layout_pattern.value if p.layout_pattern else None
    return props


def _feature(geometry: dict, properties: dict) -> dict:
    return {"type": "Feature", "geometry": geometry, "properties": properties}


def dataset_to_collections(ds: Dataset, metadata: dict | None = None) -> dict[str, dict]:
    """Serialize every layer to a FeatureCollection dict (projected coords)."""
    def collection(features: list[dict]) -> dict:
        out: dict[str, Any] = {"type": "FeatureCollection"}
        if metadata is not None:
            out["metadata"] = metadata
        out["features"] = features
        return out

    return {
        "buildings": collection(
            [_feature(polygon_geometry(b.parts, b.multipart), building_properties(b)) for b in ds.buildings]
        ),
        "plots": collection(
            [_feature(polygon_geometry([p.geometry], False), plot_properties(p)) for p in ds.plots]
        ),
        "pois": collection(
            [
                _feature(
                    {"type": "Point", "coordinates": [float(p.location[0]), float(p.location[1])]},
                    _clean({"id": p.id, "category": p.category, "rating": p.rating}),
                )
                for p in ds.pois
            ]
        ),
        "roads": collection(
            [
                _feature(
                    {"type": "LineString", "coordinates": [[float(x), float(y)] for x, y in r.coords]},
                    {"id": r.id},
                )
                for r in ds.roads
            ]
        ),
        "stops": collection(
            [
                _feature(
                    {"type": "Point", "coordinates": [float(s.location[0]), float(s.location[1])]},
                    {"id": s.id, "kind": s.kind},
                )
                for s in ds.stops
            ]
        ),
    }


def write_json(path: str | Path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_dataset(ds: Dataset, out_dir: str | Path, metadata: dict | None = None) -> dict[str, Path]:
    """Write all five enriched layers into `out_dir`; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for layer, collection in dataset_to_collections(ds, metadata).items():
        path = out_dir / f"{layer}.geojson"
        write_json(path, collection)
        paths[layer] = path
    return paths


def load_dataset(out_dir: str | Path, cfg: IndicatorConfig) -> Dataset:
    """Re-read enriched layers written by :func:`write_dataset` (already projected)."""
    import dataclasses

    out_dir = Path(out_dir)
    projected_cfg = dataclasses.replace(cfg, crs="projected")
    return parse_layers({name: out_dir / f"{name}.geojson" for name in LAYER_NAMES}, projected_cfg)
