"""Deterministic synthetic town generator for demos and end-to-end tests.

Produces a 6x5 block grid (~30 plots, ~200 buildings) with a road grid,
POIs and transit stops, exercising every indicator: symmetric and scattered
building layouts, courtyard and corridor structures, a MultiPolygon
building, missing heights/floors, unlabeled buildings for the function
classifier, and one plot whose footprints deliberately exceed the plot
area (coverage-ratio outlier).

Everything is derived from the seed, so two generations are identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .projection import SVY21

PLOT_W, PLOT_H = 110.0, 90.0
PITCH_X, PITCH_Y = 130.0, 110.0
COLS, ROWS = 6, 5
MARGIN = 25.0  # plot origin offset from road line by 10 m

LAND_USES = (
    "RESIDENTIAL",
    "COMMERCIAL",
    "BUSINESS 1",
    "EDUCATIONAL INSTITUTION",
    "PARK",
    "RESIDENTIAL WITH COMMERCIAL AT 1ST STOREY",
)

SUBZONES = ("ALPHA", "BRAVO", "CHARLIE", "DELTA")

BCR_OUTLIER_BLOCK = (1, 2)  # planted coverage-ratio outlier (a COMMERCIAL block)
FLEXIBLE_BLOCK = (1, 4)  # three mutually incompatible buildings: default layout
PARTIAL_SYM_BLOCK = (5, 3)  # mirrored quartet inside an irregular cluster


def _rect(cx: float, cy: float, w: float, h: float, angle_deg: float = 0.0) -> list[list[float]]:
    a = np.radians(angle_deg)
    u = np.array([np.cos(a), np.sin(a)])
    v = np.array([-np.sin(a), np.cos(a)])
    c = np.array([cx, cy])
    pts = [c - w / 2 * u - h / 2 * v, c + w / 2 * u - h / 2 * v, c + w / 2 * u + h / 2 * v, c - w / 2 * u + h / 2 * v]
    ring = [[round(float(p[0]), 6), round(float(p[1]), 6)] for p in pts]
    ring.append(ring[0])
    return ring


def _feature(geometry: dict, properties: dict) -> dict:
    return {"type": "Feature", "geometry": geometry, "properties": properties}


def _polygon(rings: list) -> dict:
    return {"type": "Polygon", "coordinates": rings}


class _TownBuilder:
    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)
        self.buildings: list[dict] = []
        self.plots: list[dict] = []
        self.pois: list[dict] = []
        self.roads: list[dict] = []
        self.stops: list[dict] = []
        self._bid = 0

    def next_id(self) -> str:
        self._bid += 1
        return f"B{self._bid:04d}"

    def add_building(self, rings_or_geom, height=None, floors=None, code=None) -> str:
        bid = self.next_id()
        if isinstance(rings_or_geom, dict):
            geom = rings_or_geom
        else:
            rings = rings_or_geom
            if rings and isinstance(rings[0][0], (int, float)):
                rings = [rings]  # bare exterior ring
            geom = _polygon(rings)
        props = {"id": bid}
        if height is not None:
            props["height"] = height
        if floors is not None:
            props["floors"] = floors
        if code is not None:
            props["level2_code"] = code
        self.buildings.append(_feature(geom, props))
        return bid

    def add_poi(self, category: str, x: float, y: float, rating=None) -> None:
        props = {"id": f"P{len(self.pois) + 1:03d}", "category": category}
        if rating is not None:
            props["rating"] = rating
        self.pois.append(_feature({"type": "Point", "coordinates": [round(x, 6), round(y, 6)]}, props))

    def add_stop(self, kind: str, x: float, y: float) -> None:
        self.stops.append(
            _feature(
                {"type": "Point", "coordinates": [round(x, 6), round(y, 6)]},
                {"id": f"S{len(self.stops) + 1:03d}", "kind": kind},
            )
        )


def _residential(tb: _TownBuilder, x0: float, y0: float, jitter: float) -> None:
    """Two mirrored columns of four slabs; jitter > 0 degrades the symmetry."""
    for row in range(4):
        cy = y0 + 15 + row * 20
        for cx in (x0 + 30, x0 + PLOT_W - 30):
            dx = float(tb.rng.normal(0, jitter))
            dy = float(tb.rng.normal(0, jitter))
            h = float(tb.rng.integers(25, 41))
            tb.add_building(_rect(cx + dx, cy + dy, 30, 10), height=h, code="B3")
    # two point blocks on the mirror axis
    for cy in (y0 + 25, y0 + 65):
        tb.add_building(_rect(x0 + PLOT_W / 2, cy, 12, 12), height=float(tb.rng.integers(30, 46)), code="B2")


def _commercial(tb: _TownBuilder, x0: float, y0: float, outlier: bool) -> None:
    if outlier:
        # six 45x40 towers: footprints total 10800 m2 on a 9900 m2 plot
        for k in range(6):
            cx = x0 + 25 + (k % 3) * 30
            cy = y0 + 24 + (k // 3) * 42
            tb.add_building(_rect(cx, cy, 45, 40), height=60.0, code="AB")
        return
    n = 7
    for k in range(n):
        cx = x0 + 18 + float(tb.rng.uniform(0, PLOT_W - 36))
        cy = y0 + 16 + float(tb.rng.uniform(0, PLOT_H - 32))
        cx = min(max(cx, x0 + 12), x0 + PLOT_W - 12)
        cy = min(max(cy, y0 + 11), y0 + PLOT_H - 11)
        h = float(tb.rng.integers(50, 81))
        # tower footprints vary enough that mirror pairings fail the area test
        w = float(tb.rng.uniform(13, 27))
        d = float(tb.rng.uniform(11, 23))
        code = "AB" if k % 4 != 3 else None  # sprinkle unlabeled towers
        tb.add_building(_rect(cx, cy, w, d, float(tb.rng.uniform(0, 180))), height=h, code=code)


def _business(tb: _TownBuilder, x0: float, y0: float) -> None:
    # sheds in a row plus a rank of shop units along the street edge
    for k in range(4):
        cx = x0 + 16 + k * 26
        cy = y0 + 30 + float(tb.rng.normal(0, 2.5))
        code = "B5" if k % 4 != 3 else None
        floors = int(tb.rng.integers(1, 4))
        w = float(tb.rng.uniform(15, 24))
        tb.add_building(_rect(cx, cy, w, 30), floors=floors, code=code)
    for k in range(3):
        cx = x0 + 22 + k * 33
        w = float(tb.rng.uniform(17, 30))
        tb.add_building(_rect(cx, y0 + 74, w, 10), floors=2, code="B5")


def _educational(tb: _TownBuilder, x0: float, y0: float) -> None:
    # courtyard block: 40x32 with a 16x12 inner opening
    outer = _rect(x0 + 30, y0 + 24, 40, 32)
    inner = _rect(x0 + 30, y0 + 24, 16, 12)
    tb.add_building([outer, inner], height=15.0, code="ABD")
    # MultiPolygon annex: two detached wings managed as one building
    wings = {
        "type": "MultiPolygon",
        "coordinates": [
            [_rect(x0 + 70, y0 + 16, 18, 12)],
            [_rect(x0 + 94, y0 + 16, 14, 12)],
        ],
    }
    tb.add_building(wings, height=9.0, code="ABD")
    for k in range(3):
        cx = x0 + 20 + k * 32
        cy = y0 + 66
        code = "ABD" if k != 1 else None
        tb.add_building(_rect(cx, cy, 24, 16), height=12.0, code=code)


def _park(tb: _TownBuilder, x0: float, y0: float) -> None:
    # pavilion under the layout size filter; no height, no label
    tb.add_building(_rect(x0 + PLOT_W / 2, y0 + PLOT_H / 2, 8, 6))


def _commercial_trio(tb: _TownBuilder, x0: float, y0: float) -> None:
    # three buildings with mutually incompatible areas and aspect ratios;
    # no rule above the default can fire
    tb.add_building(_rect(x0 + 25, y0 + 30, 16, 13), height=40.0, code="AB")
    tb.add_building(_rect(x0 + 70, y0 + 20, 30, 10), height=25.0, code="AB")
    tb.add_building(_rect(x0 + 55, y0 + 70, 13, 11), height=55.0)


def _mixed_partial(tb: _TownBuilder, x0: float, y0: float) -> None:
    # two mirrored slab pairs surrounded by four odd-sized strays: the full
    # set fails the approximate test but the quartet keeps local symmetry
    for cy in (y0 + 20, y0 + 48):
        tb.add_building(_rect(x0 + 30, cy, 24, 10), height=30.0, code="AB4")
        tb.add_building(_rect(x0 + 80, cy, 24, 10), height=30.0, code="AB4")
    for cx, cy, w, h in ((14, 72, 29.0, 14.5), (92, 76, 15.5, 9.7), (52, 43, 11.0, 8.2), (75, 66, 23.0, 14.0)):
        tb.add_building(_rect(x0 + cx, y0 + cy, w, h), height=12.0, code="AB4")


def _mixed(tb: _TownBuilder, x0: float, y0: float) -> None:
    # two slabs bridged by a thin corridor (touching both within 0.5 m)
    ya = y0 + 20
    tb.add_building(_rect(x0 + 25, ya, 30, 12), height=30.0, code="AB4")
    tb.add_building(_rect(x0 + 75, ya, 30, 12), height=30.0, code="AB4")
    # corridor strip spans the 20 m gap between the slab inner edges
    tb.add_building(_rect(x0 + 50, ya, 20.4, 4), height=3.0)
    for k in range(4):
        cx = x0 + 20 + k * 24
        tb.add_building(_rect(cx, y0 + 62, 18, 14), height=float(tb.rng.integers(20, 50)), code="AB4")


_FILLERS = {
    "RESIDENTIAL": _residential,
    "COMMERCIAL": _commercial,
    "BUSINESS 1": _business,
    "EDUCATIONAL INSTITUTION": _educational,
    "PARK": _park,
    "RESIDENTIAL WITH COMMERCIAL AT 1ST STOREY": _mixed,
}


def build_town(seed: int = 7) -> dict[str, dict]:
    """Generate the five layers as FeatureCollection dicts (planar metres)."""
    tb = _TownBuilder(seed)

    for j in range(ROWS):
        for i in range(COLS):
            x0 = MARGIN + i * PITCH_X
            y0 = MARGIN + j * PITCH_Y
            land_use = LAND_USES[(i + j * COLS) % len(LAND_USES)]
            subzone = SUBZONES[(i // 3) + 2 * (j // 3)]
            tb.plots.append(
                _feature(
                    _polygon([_rect(x0 + PLOT_W / 2, y0 + PLOT_H / 2, PLOT_W, PLOT_H)]),
                    {"mp_name": f"kml_{1000 + j * COLS + i}", "land_use": land_use, "subzone": subzone},
                )
            )
            if (i, j) == FLEXIBLE_BLOCK:
                _commercial_trio(tb, x0, y0)
            elif (i, j) == PARTIAL_SYM_BLOCK:
                _mixed_partial(tb, x0, y0)
            elif land_use == "RESIDENTIAL":
                jitter = 0.0 if (i + j) % 2 == 0 else 1.2
                _residential(tb, x0, y0, jitter)
            elif land_use == "COMMERCIAL":
                _commercial(tb, x0, y0, outlier=(i, j) == BCR_OUTLIER_BLOCK)
            else:
                _FILLERS[land_use](tb, x0, y0)

    # one stray shed straddling a road, centroid outside every plot
    tb.add_building(_rect(MARGIN - 10.0, MARGIN + 200.0, 12, 9), height=4.0)

    # strip heights from a sprinkling of buildings to exercise the fallback
    for k, f in enumerate(tb.buildings):
        if k % 17 == 5:
            f["properties"].pop("height", None)
            f["properties"].pop("floors", None)

    # --- road grid with vertices at every crossing -------------------------
    xs = [MARGIN - 10.0 + i * PITCH_X for i in range(COLS + 1)]
    ys = [MARGIN - 10.0 + j * PITCH_Y for j in range(ROWS + 1)]
    for i, x in enumerate(xs):
        coords = [[x, y] for y in ys]
        tb.roads.append(_feature({"type": "LineString", "coordinates": coords}, {"id": f"RV{i}"}))
    for j, y in enumerate(ys):
        coords = [[x, y] for x in xs]
        tb.roads.append(_feature({"type": "LineString", "coordinates": coords}, {"id": f"RH{j}"}))

    # --- transit stops on the road grid -------------------------------------
    for i in (1, 3, 5):
        for j in range(ROWS):
            tb.add_stop("bus", xs[i], MARGIN + j * PITCH_Y + PLOT_H / 2)
    tb.add_stop("mrt", xs[2], ys[2])
    tb.add_stop("mrt", xs[4], ys[3])

    # --- POIs -----------------------------------------------------------------
    cx_town = xs[-1] / 2
    cy_town = ys[-1] / 2
    tb.add_poi("hospital", cx_town, cy_town, rating=4.5)
    for j in (0, 2, 4):
        tb.add_poi("school", xs[1] + 18.0, ys[j] + 40.0)
    for i in (0, 2, 4):
        tb.add_poi("supermarket", xs[i] + 55.0, ys[1] + 12.0, rating=3.9)
    for i in (1, 4):
        tb.add_poi("park", xs[i] + 30.0, ys[4] - 20.0)
    for i in range(5):
        tb.add_poi("convenience", xs[i] + 40.0, ys[3] + 8.0)
    # POI anchors for level-3 refinement
    tb.add_poi("temple", MARGIN + 3 * PITCH_X + 30.0, MARGIN + 0 * PITCH_Y + 66.0)
    tb.add_poi("student hostel", MARGIN + 3 * PITCH_X + 84.0, MARGIN + 0 * PITCH_Y + 16.0)

    def collection(features: list[dict]) -> dict:
        return {"type": "FeatureCollection", "features": features}

    return {
        "buildings": collection(tb.buildings),
        "plots": collection(tb.plots),
        "pois": collection(tb.pois),
        "roads": collection(tb.roads),
        "stops": collection(tb.stops),
    }


def _to_wgs84(collections: dict[str, dict]) -> dict[str, dict]:
    def conv_pt(c):
        lon, lat = SVY21.inverse(float(c[0]), float(c[1]))
        return [round(lon, 12), round(lat, 12)]

    def conv(coords, depth):
        if depth == 0:
            return conv_pt(coords)
        return [conv(c, depth - 1) for c in coords]

    depth_by_type = {"Point": 0, "LineString": 1, "Polygon": 2, "MultiPolygon": 3}
    out = {}
    for layer, coll in collections.items():
        feats = []
        for f in coll["features"]:
            geom = f["geometry"]
            depth = depth_by_type[geom["type"]]
            feats.append(
                _feature({"type": geom["type"], "coordinates": conv(geom["coordinates"], depth)}, dict(f["properties"]))
            )
        out[layer] = {"type": "FeatureCollection", "features": feats}
    return out


def generate_town(
    out_dir: str | Path, seed: int = 7, crs: str = "projected", inputs_prefix: str | None = None
) -> dict[str, Path]:
    """Write the five town layers plus a ready-to-run config file.

    The config's input paths are absolute unless `inputs_prefix` is given,
    in which case they are written as `<prefix>/<layer>.geojson` (useful
    for configs committed alongside the data).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    collections = build_town(seed)
    if crs == "wgs84":
        collections = _to_wgs84(collections)

    paths: dict[str, Path] = {}
    for layer, coll in collections.items():
        path = out_dir / f"{layer}.geojson"
        path.write_text(json.dumps(coll, indent=2, allow_nan=False) + "\n", encoding="utf-8")
        paths[layer] = path

    from .config import IndicatorConfig

    if inputs_prefix is not None:
        inputs = {k: f"{inputs_prefix}/{k}.geojson" for k in collections}
    else:
        inputs = {k: str(p) for k, p in paths.items()}
    cfg = IndicatorConfig(crs=crs, seed=seed, inputs=inputs)
    cfg_path = out_dir / "config.json"
    cfg.save(cfg_path)
    paths["config"] = cfg_path
    return paths
