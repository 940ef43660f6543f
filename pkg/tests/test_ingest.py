"""Parsing, validation, plot assignment, round-trip, and spatial index."""

import json

import numpy as np
import pytest

from sitemetrics.config import IndicatorConfig
from sitemetrics.geojson_io import LayerError, load_dataset, parse_layers, write_dataset
from sitemetrics.geometry import Polygon, point_in_polygon
from sitemetrics.ingest import assign_buildings_to_plots, validate
from sitemetrics.records import BuildingRecord, Dataset, PlotRecord
from sitemetrics.spatial import SpatialIndex, boxes_intersect


def square(x0, y0, size):
    return [
        [x0, y0],
        [x0 + size, y0],
        [x0 + size, y0 + size],
        [x0, y0 + size],
        [x0, y0],
    ]


def feature(geom_type, coords, **props):
    return {"type": "Feature", "geometry": {"type": geom_type, "coordinates": coords}, "properties": props}


def collection(*features):
    return {"type": "FeatureCollection", "features": list(features)}


def write_layers(tmp_path, **collections):
    defaults = {name: collection() for name in ("buildings", "plots", "pois", "roads", "stops")}
    defaults.update(collections)
    paths = {}
    for name, coll in defaults.items():
        p = tmp_path / f"{name}.geojson"
        p.write_text(json.dumps(coll))
        paths[name] = p
    return paths


PROJECTED = IndicatorConfig(crs="projected")


class TestParseLayers:
    def test_valid_and_degenerate_mix(self, tmp_path):
        paths = write_layers(
            tmp_path,
            buildings=collection(
                feature("Polygon", [square(0, 0, 10)], id="a", height=3),
                feature("Polygon", [square(20, 0, 10)], id="b", floors=2),
                feature("Polygon", [[[0, 0], [1, 1], [0, 0]]], id="bad"),
            ),
        )
        ds = parse_layers(paths, PROJECTED)
        assert [b.id for b in ds.buildings] == ["a", "b"]
        assert len(ds.rejections) == 1
        assert ds.rejections[0].feature_id == "bad"
        assert "ring" in ds.rejections[0].reason

    def test_empty_collection(self, tmp_path):
        ds = parse_layers(write_layers(tmp_path), PROJECTED)
        assert ds.buildings == [] and ds.rejections == []

    def test_height_without_floors(self, tmp_path):
        paths = write_layers(
            tmp_path,
            buildings=collection(feature("Polygon", [square(0, 0, 5)], id="a", height=3)),
        )
        ds = parse_layers(paths, PROJECTED)
        assert ds.buildings[0].height == 3.0
        assert ds.buildings[0].num_floors is None

    def test_missing_required_property_rejected(self, tmp_path):
        paths = write_layers(
            tmp_path,
            buildings=collection(feature("Polygon", [square(0, 0, 5)], height=3)),
            plots=collection(feature("Polygon", [square(0, 0, 50)], mp_name="p1", land_use="RESIDENTIAL")),
        )
        ds = parse_layers(paths, PROJECTED)
        assert ds.buildings == [] and ds.plots == []
        reasons = {r.layer: r.reason for r in ds.rejections}
        assert "id" in reasons["buildings"]
        assert "subzone" in reasons["plots"]

    def test_unreadable_file_fatal(self, tmp_path):
        paths = write_layers(tmp_path)
        paths["buildings"] = tmp_path / "missing.geojson"
        with pytest.raises(LayerError):
            parse_layers(paths, PROJECTED)

    def test_not_a_collection_fatal(self, tmp_path):
        paths = write_layers(tmp_path)
        (tmp_path / "buildings.geojson").write_text('{"type": "Feature"}')
        with pytest.raises(LayerError):
            parse_layers(paths, PROJECTED)

    def test_wgs84_projection_applied(self, tmp_path):
        lon0, lat0 = 103.8, 1.30
        coords = [
            [lon0, lat0],
            [lon0 + 0.0001, lat0],
            [lon0 + 0.0001, lat0 + 0.0001],
            [lon0, lat0 + 0.0001],
            [lon0, lat0],
        ]
        paths = write_layers(tmp_path, buildings=collection(feature("Polygon", [coords], id="a")))
        ds = parse_layers(paths, IndicatorConfig(crs="wgs84"))
        # 0.0001 deg is ~11 m on the ground; the footprint should be metric now
        assert ds.buildings[0].foot_area == pytest.approx(11.1 * 11.06, rel=0.02)

    def test_multipolygon_building(self, tmp_path):
        paths = write_layers(
            tmp_path,
            buildings=collection(
                feature("MultiPolygon", [[square(0, 0, 5)], [square(10, 0, 5)]], id="m")
            ),
        )
        ds = parse_layers(paths, PROJECTED)
        assert ds.buildings[0].multipart
        assert ds.buildings[0].foot_area == pytest.approx(50.0)

    def test_stop_kind_validation(self, tmp_path):
        paths = write_layers(
            tmp_path,
            stops=collection(
                feature("Point", [0, 0], id="s1", kind="bus"),
                feature("Point", [1, 1], id="s2", kind="tram"),
            ),
        )
        ds = parse_layers(paths, PROJECTED)
        assert [s.id for s in ds.stops] == ["s1"]
        assert len(ds.rejections) == 1

    def test_multilinestring_road_split(self, tmp_path):
        paths = write_layers(
            tmp_path,
            roads=collection(feature("MultiLineString", [[[0, 0], [5, 0]], [[10, 0], [15, 0]]], id="r")),
        )
        ds = parse_layers(paths, PROJECTED)
        assert [r.id for r in ds.roads] == ["r/0", "r/1"]


def make_plot(name, x0, y0, size, land_use="RESIDENTIAL", subzone="Z"):
    p = PlotRecord(
        mp_name=name,
        land_use=land_use,
        subzone=subzone,
        geometry=Polygon(np.array(square(x0, y0, size), dtype=float)),
    )
    p.compute_morphology()
    return p


def make_building(bid, x0, y0, size):
    b = BuildingRecord(id=bid, parts=[Polygon(np.array(square(x0, y0, size), dtype=float))])
    b.compute_morphology()
    return b


class TestAssignment:
    def test_centroid_inside(self):
        ds = Dataset(buildings=[make_building("b", 10, 10, 5)], plots=[make_plot("P", 0, 0, 50)])
        assign_buildings_to_plots(ds)
        assert ds.buildings[0].plot_id == "P"

    def test_centroid_outside_everything(self):
        ds = Dataset(buildings=[make_building("b", 100, 100, 5)], plots=[make_plot("P", 0, 0, 50)])
        assign_buildings_to_plots(ds)
        assert ds.buildings[0].plot_id is None

    def test_boundary_tie_smallest_plot_wins(self):
        # centroid at (30, 15): on the shared edge x=30 of both plots
        small = make_plot("small", 30, 0, 22)  # area 484
        big = make_plot("big", 0, 0, 30)  # area 900
        b = make_building("b", 27.5, 12.5, 5)  # centroid (30, 15)
        cx, cy = b.centroid()
        assert cx == 30.0
        assert point_in_polygon((cx, cy), small.geometry) and point_in_polygon((cx, cy), big.geometry)
        ds = Dataset(buildings=[b], plots=[big, small])
        assign_buildings_to_plots(ds)
        assert ds.buildings[0].plot_id == "small"

    def test_matches_brute_force_scan(self):
        rng = np.random.default_rng(5)
        plots = [make_plot(f"p{i}", float(rng.uniform(0, 200)), float(rng.uniform(0, 200)), float(rng.uniform(10, 40))) for i in range(25)]
        buildings = [make_building(f"b{i}", float(rng.uniform(0, 220)), float(rng.uniform(0, 220)), 4) for i in range(60)]
        ds = Dataset(buildings=buildings, plots=plots)
        assign_buildings_to_plots(ds)
        for b in ds.buildings:
            c = b.centroid()
            hits = [p for p in plots if point_in_polygon(c, p.geometry, boundary=True)]
            if not hits:
                assert b.plot_id is None
            else:
                hits.sort(key=lambda p: (p.plot_area, p.mp_name))
                assert b.plot_id == hits[0].mp_name


class TestValidation:
    def test_duplicate_ids(self):
        ds = Dataset(buildings=[make_building("x", 0, 0, 5), make_building("x", 10, 10, 5)])
        report = validate(ds)
        assert report.duplicate_building_ids == ["x"]

    def test_clean_dataset(self):
        b = make_building("b", 10, 10, 5)
        b.height = 10.0
        b.num_floors = 3
        ds = Dataset(buildings=[b], plots=[make_plot("P", 0, 0, 50)])
        assign_buildings_to_plots(ds)
        assert validate(ds).is_clean()

    def test_missing_height_flagged(self):
        b = make_building("b", 10, 10, 5)
        b.num_floors = 2
        ds = Dataset(buildings=[b], plots=[make_plot("P", 0, 0, 50)])
        assign_buildings_to_plots(ds)
        report = validate(ds)
        assert report.missing_height == ["b"]
        assert report.missing_floors == []

    def test_never_mutates(self):
        b = make_building("b", 10, 10, 5)
        ds = Dataset(buildings=[b])
        before = (b.id, b.foot_area, b.plot_id, b.height)
        validate(ds)
        assert (b.id, b.foot_area, b.plot_id, b.height) == before


class TestRoundTrip:
    def test_enriched_dataset_survives_rewrite(self, tmp_path):
        from sitemetrics.synthtown import generate_town

        town = generate_town(tmp_path / "town", seed=7)
        cfg = IndicatorConfig.from_file(town["config"])
        ds = parse_layers({k: town[k] for k in ("buildings", "plots", "pois", "roads", "stops")}, cfg)
        assign_buildings_to_plots(ds)

        from sitemetrics.diversity import run_diversity
        from sitemetrics.forms import run_forms
        from sitemetrics.intensity import run_intensity

        run_forms(ds, cfg)
        run_diversity(ds, cfg)
        run_intensity(ds, cfg)

        out1 = tmp_path / "o1"
        out2 = tmp_path / "o2"
        write_dataset(ds, out1)
        ds2 = load_dataset(out1, cfg)
        assign_buildings_to_plots(ds2)
        write_dataset(ds2, out2)
        for name in ("buildings", "plots", "pois", "roads", "stops"):
            b1 = (out1 / f"{name}.geojson").read_bytes()
            b2 = (out2 / f"{name}.geojson").read_bytes()
            assert b1 == b2, f"{name} layer changed across a parse/serialize cycle"

        # field-for-field record equality on buildings
        for a, b in zip(ds.buildings, ds2.buildings):
            assert a.id == b.id
            assert a.parts == b.parts
            assert a.height == b.height
            assert a.num_floors == b.num_floors
            assert a.foot_area == b.foot_area
            assert a.form_type == b.form_type
            assert a.orientation == b.orientation
            assert a.plot_id == b.plot_id
        for a, b in zip(ds.plots, ds2.plots):
            assert a.mp_name == b.mp_name
            assert a.functional_ratios == b.functional_ratios
            assert a.si == b.si and a.far == b.far and a.bcr == b.bcr


class TestSpatialIndex:
    def test_superset_of_geometric_hits_and_exact_after_refine(self):
        rng = np.random.default_rng(8)
        polys = []
        boxes = []
        for _ in range(120):
            x0, y0 = rng.uniform(0, 500, 2)
            w, h = rng.uniform(2, 60, 2)
            poly = Polygon(np.array(square(float(x0), float(y0), 1.0), dtype=float) * [1, 1] + 0)
            poly = Polygon(np.array([[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h], [x0, y0]], dtype=float))
            polys.append(poly)
            boxes.append(poly.bounds())
        index = SpatialIndex(boxes)
        for _ in range(60):
            qx, qy = rng.uniform(0, 500, 2)
            qw, qh = rng.uniform(5, 120, 2)
            qbox = (qx, qy, qx + qw, qy + qh)
            got = set(index.query(qbox))
            brute = {i for i, b in enumerate(boxes) if boxes_intersect(b, qbox)}
            assert got == brute  # bbox tree is exact at the bbox level

    def test_point_query(self):
        boxes = [(0, 0, 10, 10), (20, 20, 30, 30)]
        index = SpatialIndex(boxes)
        assert index.query_point(5, 5) == [0]
        assert index.query_point(25, 25) == [1]
        assert index.query_point(15, 15) == []

    def test_empty_index(self):
        assert SpatialIndex([]).query((0, 0, 1, 1)) == []
