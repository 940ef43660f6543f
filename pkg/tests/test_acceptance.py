"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines as
they complete. Every tolerance is pinned here, not configurable.
"""

import dataclasses
import math
import random
import time

import numpy as np
import pytest

from sitemetrics import rgcn
from sitemetrics.access import build_road_graph, connectivity_index, network_distance, transit_accessibility
from sitemetrics.config import IndicatorConfig
from sitemetrics.diversity import simpson_index
from sitemetrics.forms import classify_polygon
from sitemetrics.geometry import GeometryError, Polygon, convex_hull, mbr_of_points
from sitemetrics.intensity import building_coverage_ratio, effective_floors, floor_area_ratio
from sitemetrics.layout import cascade_trace, classify_layout
from sitemetrics.records import FormType, PoiRecord, RoadLine, TransitStop
from sitemetrics.reports import aggregate_stats
from sitemetrics.synthtown import generate_town

from layout_fixtures import SPEC_FIXTURES, building, square_plot
from oracles import brute_force_network_distance, rotation_search_mbr_area
from test_access import plot_at, road
from test_intensity import building as area_building, plot as area_plot
from test_rgcn import planted_graph, random_graph

CFG = IndicatorConfig(crs="projected")


def verdict(n: int, text: str) -> None:
    print(f"\nACCEPTANCE {n}: PASS - {text}")


class TestCriterion1Formulas:
    def test_formula_exactness(self):
        t0 = time.perf_counter()
        assert simpson_index({"a": 0.5, "b": 0.5}) == pytest.approx(0.5, abs=1e-12)
        assert simpson_index({"a": 1.0}) == pytest.approx(0.0, abs=1e-12)
        for k in range(2, 7):
            ratios = {f"c{i}": 1.0 / k for i in range(k)}
            assert simpson_index(ratios) == pytest.approx(1.0 - 1.0 / k, abs=1e-12)

        far, _ = floor_area_ratio(
            area_plot(800), [area_building("a", 200, floors=5), area_building("b", 300, floors=2)], CFG
        )
        assert far == pytest.approx(2.0, abs=1e-12)
        far1, _ = floor_area_ratio(area_plot(400), [area_building("c", 400, floors=1)], CFG)
        assert far1 == pytest.approx(1.0, abs=1e-12)
        assert effective_floors(area_building("d", 100, height=3), CFG) == (1, True)

        bcr, out = building_coverage_ratio(area_plot(800), [area_building("e", 500)])
        assert bcr == pytest.approx(0.625, abs=1e-12) and not out
        bcr2, out2 = building_coverage_ratio(
            area_plot(800), [area_building("f", 500), area_building("g", 340)]
        )
        assert bcr2 == pytest.approx(1.05, abs=1e-12) and out2
        bcr3, out3 = building_coverage_ratio(area_plot(800), [])
        assert bcr3 == 0.0 and not out3

        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0
        verdict(1, f"SI/FAR/BCR formulas exact to 1e-12 ({elapsed:.3f}s)")


def rect_poly(w, h, angle_deg=0.0, cx=0.0, cy=0.0, hole=False):
    a = math.radians(angle_deg)
    u = np.array([math.cos(a), math.sin(a)])
    v = np.array([-math.sin(a), math.cos(a)])
    c = np.array([cx, cy])
    pts = [c - w / 2 * u - h / 2 * v, c + w / 2 * u - h / 2 * v, c + w / 2 * u + h / 2 * v, c - w / 2 * u + h / 2 * v]
    ring = np.vstack(pts + [pts[0]])
    interiors = []
    if hole:
        hw, hh = w / 8.0, h / 8.0
        hp = [c - hw * u - hh * v, c + hw * u - hh * v, c + hw * u + hh * v, c - hw * u + hh * v]
        interiors = [np.vstack(hp + [hp[0]])]
    return Polygon(ring, interiors=interiors)


class TestCriterion2FormClassifier:
    ARS = (1.0, 1.5, 1.50001, 4.0, 8.0, 8.00001, 20.0)

    def expected(self, ar, hole):
        if hole:
            return FormType.ENCLOSED_FORM
        if ar <= 1.5:
            return FormType.POINT
        if ar <= 8.0:
            return FormType.SLAB
        return FormType.LINE_LIKE_SLAB

    def test_fifty_polygon_suite_with_invariance(self):
        rng = np.random.default_rng(77)
        fixtures = []
        for ar in self.ARS:
            for variant in range(6):
                fixtures.append((ar, False, variant))
        for ar in (1.0, 4.0, 20.0):
            for variant in range(3):
                fixtures.append((ar, True, variant))
        assert len(fixtures) >= 50

        for ar, hole, variant in fixtures:
            base_angle = float(rng.uniform(0, 360))
            base_scale = float(rng.uniform(0.5, 20))
            cx, cy = (float(v) for v in rng.uniform(-1e4, 1e4, 2))
            poly = rect_poly(ar * base_scale, base_scale, base_angle, cx, cy, hole)
            want = self.expected(ar, hole)
            assert classify_polygon(poly, CFG) is want, f"AR {ar} hole={hole} variant {variant}"
            for _ in range(5):
                angle = float(rng.uniform(0, 360))
                scale = float(rng.uniform(0.2, 40))
                tx, ty = (float(v) for v in rng.uniform(-1e4, 1e4, 2))
                poly_t = rect_poly(ar * base_scale * scale, base_scale * scale, angle, tx, ty, hole)
                assert classify_polygon(poly_t, CFG) is want
        verdict(2, f"{len(fixtures)} form fixtures, 100% agreement, 5 random transforms each")


class TestCriterion3MbrOracle:
    def test_calipers_vs_rotation_search(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(123)
        checked = 0
        while checked < 200:
            n = int(rng.integers(4, 16))
            pts = rng.normal(scale=float(rng.uniform(1, 50)), size=(n, 2))
            try:
                hull = convex_hull(pts)
            except GeometryError:
                continue
            m = mbr_of_points(pts)
            grid = rotation_search_mbr_area(hull)
            area = m.length * m.width
            assert area <= grid + 1e-9 * max(1.0, grid)
            assert grid / area - 1.0 < 1e-3, f"polygon {checked}: grid {grid} vs calipers {area}"
            checked += 1
        elapsed = time.perf_counter() - t0
        assert elapsed < 30.0
        verdict(3, f"200 random polygons within 0.1% of 0.01-degree search ({elapsed:.1f}s)")


class TestCriterion4LayoutCascade:
    def test_fixtures_precedence_null_determinism(self):
        for fixture in SPEC_FIXTURES:
            plot, bs, expected = fixture()
            trace = cascade_trace(plot, bs, CFG)
            assert classify_layout(plot, bs, CFG) is expected, fixture.__name__
            for pattern, fired in trace:
                if pattern is expected:
                    assert fired
                    break
                assert not fired, f"{fixture.__name__}: {pattern} fired before {expected}"

        assert classify_layout(square_plot(), [], CFG) is None
        assert classify_layout(square_plot(), [building("one", 50, 50, 20, 10)], CFG) is None

        shuffler = random.Random(4242)
        for fixture in SPEC_FIXTURES:
            plot, bs, expected = fixture()
            for _ in range(10):
                shuffled = bs[:]
                shuffler.shuffle(shuffled)
                assert classify_layout(plot, shuffled, CFG) is expected
        verdict(4, "5 cascade fixtures with precedence, null contract, 10-shuffle determinism")


class TestCriterion5Accessibility:
    def test_network_distance_vs_enumeration(self):
        rng = np.random.default_rng(555)
        graphs = 0
        while graphs < 100:
            n_roads = int(rng.integers(1, 5))
            roads = [
                road(str(i), *rng.uniform(0, 120, size=(int(rng.integers(2, 4)), 2))) for i in range(n_roads)
            ]
            g = build_road_graph(roads, snap_tol=1.0)
            if g.node_count == 0 or g.node_count > 10 or g.edge_count == 0:
                continue
            a, b = rng.integers(0, g.node_count, 2)
            origin = tuple(g.nodes[a])
            dest = tuple(g.nodes[b])
            got = network_distance(g, origin, dest)
            want = brute_force_network_distance(g, origin, dest)
            if math.isinf(want):
                assert math.isinf(got)
            else:
                assert got == pytest.approx(want, abs=1e-12)
            # plus one interior-point query per graph
            p = tuple(rng.uniform(0, 120, 2))
            q = tuple(rng.uniform(0, 120, 2))
            got2 = network_distance(g, p, q)
            want2 = brute_force_network_distance(g, p, q)
            if math.isinf(want2):
                assert math.isinf(got2)
            else:
                assert got2 == pytest.approx(want2, abs=1e-9)
            graphs += 1

    def test_pta_exact_third_and_subset_property(self):
        g = build_road_graph([road("m", (-600, 0), (600, 0))], snap_tol=1.0)
        stops = [
            TransitStop("b1", "bus", (200.0, 0.0)),
            TransitStop("b2", "bus", (150.0, 190.0)),
            TransitStop("m1", "mrt", (300.0, 390.0)),
        ]
        access = transit_accessibility(plot_at(0, 0), g, stops, CFG)
        assert access.pta == pytest.approx(1.0 / 3.0, abs=1e-15)

        rng = np.random.default_rng(31337)
        for _ in range(1000):
            roads = [road(str(i), *rng.uniform(-300, 300, size=(2, 2))) for i in range(int(rng.integers(1, 4)))]
            g = build_road_graph(roads, snap_tol=1.0)
            plot = plot_at(float(rng.uniform(-100, 100)), float(rng.uniform(-100, 100)))
            stops = [
                TransitStop(
                    str(k),
                    "bus" if rng.random() < 0.7 else "mrt",
                    (float(rng.uniform(-400, 400)), float(rng.uniform(-400, 400))),
                )
                for k in range(int(rng.integers(0, 6)))
            ]
            access = transit_accessibility(plot, g, stops, CFG)
            for mode in access.buffer_counts:
                assert access.accessible_counts[mode] <= access.buffer_counts[mode]
            assert 0.0 <= access.pta <= 1.0

    def test_ci_fixture_and_monotonicity(self):
        pois = [
            PoiRecord("1", "hospital", (200.0, 0.0)),
            PoiRecord("2", "school", (0.0, 1000.0)),
            PoiRecord("3", "supermarket", (2500.0, 0.0)),
        ]
        assert connectivity_index(plot_at(0, 0), pois, CFG) == pytest.approx(30.2, abs=1e-9)

        rng = np.random.default_rng(987)
        categories = list(CFG.facility_weights)
        for _ in range(500):
            n = int(rng.integers(1, 8))
            pois = [
                PoiRecord(
                    str(i),
                    categories[int(rng.integers(0, len(categories)))],
                    (float(rng.uniform(-4000, 4000)), float(rng.uniform(-3000, 3000))),
                )
                for i in range(n)
            ]
            base = connectivity_index(plot_at(0, 0), pois, CFG)
            # adding an in-radius facility strictly increases CI
            extra = PoiRecord("x", "park", (float(rng.uniform(-3000, 3000)), float(rng.uniform(-3000, 3000))))
            assert connectivity_index(plot_at(0, 0), pois + [extra], CFG) > base
            # pushing one facility farther (same category) never increases CI
            if pois:
                k = int(rng.integers(0, n))
                farther = list(pois)
                loc = pois[k].location
                scale = float(rng.uniform(1.1, 3.0))
                farther[k] = PoiRecord(pois[k].id, pois[k].category, (loc[0] * scale, loc[1] * scale))
                assert connectivity_index(plot_at(0, 0), farther, CFG) <= base + 1e-12
        verdict(5, "path oracle on 100 graphs, PTA=1/3 exact, CI=30.2, monotone on 500 perturbations")


class TestCriterion6Rgcn:
    def test_numerics_and_learning(self):
        t0 = time.perf_counter()

        # analytic vs central finite differences on 20 random graphs
        rng = np.random.default_rng(7)
        for trial in range(20):
            x, rels, labels, _ = random_graph(rng, f=3)
            model = rgcn.RgcnModel.init([3, 4, 3], 2, 0.0, seed=trial)
            idx = np.arange(x.shape[0])
            loss, grads = rgcn.loss_and_grads(model, x, rels, labels, idx)
            flat = [g for layer in grads for g in ([layer["self"]] + layer["rel"])]
            h = 1e-5
            for (_, w), g in zip(model.parameters(), flat):
                for it in range(w.size):
                    orig = w.flat[it]
                    w.flat[it] = orig + h
                    lp, _ = rgcn.loss_and_grads(model, x, rels, labels, idx)
                    w.flat[it] = orig - h
                    lm, _ = rgcn.loss_and_grads(model, x, rels, labels, idx)
                    w.flat[it] = orig
                    fd = (lp - lm) / (2 * h)
                    denom = max(abs(fd), abs(g.flat[it]), 1e-8)
                    assert abs(fd - g.flat[it]) / denom <= 1e-4

        # exact permutation equivariance
        for trial in range(20):
            x, rels, _, (e1, e2) = random_graph(rng)
            n = x.shape[0]
            model = rgcn.RgcnModel.init([3, 4, 3], 2, 0.0, seed=100 + trial)
            out = rgcn.forward(model, x, rels)
            perm = rng.permutation(n)
            pmap = {int(old): int(new) for new, old in enumerate(perm)}
            prels = [rgcn.Relation.from_edges(n, [(pmap[i], pmap[j]) for i, j in e]) for e in (e1, e2)]
            assert np.array_equal(rgcn.forward(model, x[perm], prels), out[perm])

        # bitwise-identical training traces for a fixed seed
        x, rels, labels = planted_graph(seed=2, n=45)
        _, r1 = rgcn.train(x, rels, labels, ["a", "b", "c"], epochs=60, folds=3, seed=11)
        _, r2 = rgcn.train(x, rels, labels, ["a", "b", "c"], epochs=60, folds=3, seed=11)
        assert r1.epoch_losses == r2.epoch_losses and r1.fold_accuracies == r2.fold_accuracies

        # planted 3-class accuracy: 150 nodes, 500 epochs, 5-fold CV
        x, rels, labels = planted_graph(seed=0, n=150)
        _, report = rgcn.train(x, rels, labels, ["a", "b", "c"], epochs=500, folds=5, seed=0)
        mean_acc = float(np.mean(report.fold_accuracies))
        majority = max(np.bincount(labels)) / len(labels)
        assert mean_acc >= 0.90
        assert majority == pytest.approx(1.0 / 3.0, abs=0.01)

        elapsed = time.perf_counter() - t0
        assert elapsed < 120.0
        verdict(6, f"gradients 1e-4, exact equivariance, bitwise seeds, CV acc {mean_acc:.3f} vs 0.33 ({elapsed:.0f}s)")


class TestCriterion7PipelineDeterminism:
    def test_two_runs_byte_identical(self, tmp_path):
        from sitemetrics.pipeline import run_pipeline

        t0 = time.perf_counter()
        town = generate_town(tmp_path / "town", seed=7)
        cfg = IndicatorConfig.from_file(town["config"])

        out_a, out_b = tmp_path / "run_a", tmp_path / "run_b"
        run_pipeline(cfg, out_a)
        run_pipeline(cfg, out_b)

        compared = 0
        for path_a in sorted(out_a.iterdir()):
            if path_a.suffix not in (".geojson", ".csv", ".svg"):
                continue  # the manifest records wall-clock timings
            path_b = out_b / path_a.name
            assert path_b.exists(), path_a.name
            assert path_a.read_bytes() == path_b.read_bytes(), f"{path_a.name} differs between runs"
            compared += 1
        assert compared >= 15

        import json

        plots = json.loads((out_a / "plots.geojson").read_text())
        site_fields = ("mp_name", "land_use", "plot_area", "subzone", "Layout_Pattern", "FR", "SI", "PTA", "CI", "FAR", "BCR")
        for feature in plots["features"]:
            for key in site_fields:
                assert key in feature["properties"], f"missing site field {key}"

        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0
        verdict(7, f"two full runs byte-identical across {compared} files, all site fields present ({elapsed:.0f}s)")


class TestCriterion8BcrOutlierProtocol:
    def test_exclusion_rule_exact(self):
        from sitemetrics.records import Dataset

        def make_plot(name, bcr, outlier):
            p = area_plot(100, name=name)
            p.bcr = bcr
            p.bcr_outlier = outlier
            return p

        clean = Dataset(plots=[make_plot("a", 0.2, False), make_plot("b", 0.4, False)])
        planted = Dataset(
            plots=[make_plot("a", 0.2, False), make_plot("b", 0.4, False), make_plot("c", 1.3, True)]
        )
        stats_clean = {s.indicator: s for s in aggregate_stats(clean, "land_use")}
        stats_planted = {s.indicator: s for s in aggregate_stats(planted, "land_use")}

        # with the exclusion rule, the planted outlier leaves the median untouched
        assert stats_planted["BCR"].median == stats_clean["BCR"].median == pytest.approx(0.3, abs=1e-15)
        assert stats_planted["BCR"].outliers == 1 and stats_clean["BCR"].outliers == 0
        assert stats_planted["BCR"].count == 3

        # whereas a naive median over all three values would have moved
        naive = float(np.median([0.2, 0.4, 1.3]))
        assert naive != stats_planted["BCR"].median
        verdict(8, "planted BCR=1.3 excluded from the median exactly; counted as outlier")
