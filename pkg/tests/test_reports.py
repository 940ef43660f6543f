"""Aggregate report statistics, CSV shape, SVG determinism."""

import csv

import numpy as np
import pytest

from sitemetrics.geometry import Polygon
from sitemetrics.records import Dataset, FormType, LayoutPattern, PlotRecord, BuildingRecord
from sitemetrics.reports import (
    aggregate_stats,
    boxplot_svg,
    category_distribution,
    stacked_bar_svg,
    write_reports,
    write_stats_csv,
)


def plot(name, land_use="RESIDENTIAL", subzone="Z", **values):
    ring = np.array([[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]], dtype=float)
    p = PlotRecord(mp_name=name, land_use=land_use, subzone=subzone, geometry=Polygon(ring))
    p.compute_morphology()
    for k, v in values.items():
        setattr(p, k, v)
    return p


class TestAggregateStats:
    def test_median_of_two(self):
        ds = Dataset(plots=[plot("a", bcr=0.2, bcr_outlier=False), plot("b", bcr=0.4, bcr_outlier=False)])
        stats = {s.indicator: s for s in aggregate_stats(ds, "land_use")}
        assert stats["BCR"].median == pytest.approx(0.3, abs=1e-12)
        assert stats["BCR"].count == 2
        assert stats["BCR"].outliers == 0

    def test_bcr_outlier_excluded_from_quantiles(self):
        ds = Dataset(
            plots=[
                plot("a", bcr=0.2, bcr_outlier=False),
                plot("b", bcr=0.4, bcr_outlier=False),
                plot("c", bcr=1.3, bcr_outlier=True),
            ]
        )
        stats = {s.indicator: s for s in aggregate_stats(ds, "land_use")}
        assert stats["BCR"].median == pytest.approx(0.3, abs=1e-12)
        assert stats["BCR"].maximum == pytest.approx(0.4, abs=1e-12)
        assert stats["BCR"].count == 3
        assert stats["BCR"].outliers == 1

    def test_other_indicators_keep_all_values(self):
        ds = Dataset(
            plots=[
                plot("a", far=1.0, bcr=1.3, bcr_outlier=True),
                plot("b", far=3.0, bcr=0.2, bcr_outlier=False),
            ]
        )
        stats = {s.indicator: s for s in aggregate_stats(ds, "land_use")}
        assert stats["FAR"].median == pytest.approx(2.0, abs=1e-12)
        assert stats["FAR"].count == 2

    def test_group_counts_sum_to_total(self):
        ds = Dataset(
            plots=[
                plot("a", land_use="A", si=0.1),
                plot("b", land_use="B", si=0.2),
                plot("c", land_use="A", si=0.3),
            ]
        )
        stats = [s for s in aggregate_stats(ds, "land_use") if s.indicator == "SI"]
        assert sum(s.count for s in stats) == 3

    def test_uncomputed_indicator_not_counted(self):
        ds = Dataset(plots=[plot("a", si=0.4), plot("b")])
        stats = [s for s in aggregate_stats(ds, "land_use") if s.indicator == "SI"]
        assert sum(s.count for s in stats) == 1

    def test_invalid_group_field(self):
        with pytest.raises(ValueError):
            aggregate_stats(Dataset(), "height")


class TestCategoryDistribution:
    def test_form_counts_via_plot_group(self):
        p = plot("P", land_use="A")
        ring = np.array([[0, 0], [5, 0], [5, 5], [0, 5], [0, 0]], dtype=float)
        bs = []
        for i, form in enumerate([FormType.POINT, FormType.POINT, FormType.POINT, FormType.SLAB]):
            b = BuildingRecord(id=f"b{i}", parts=[Polygon(ring)])
            b.compute_morphology()
            b.form_type = form
            b.plot_id = "P"
            bs.append(b)
        dist = category_distribution(Dataset(buildings=bs, plots=[p]), "land_use", "form")
        assert dist == {"A": {"Point": 3, "Slab": 1}}

    def test_layout_counts_include_null(self):
        ds = Dataset(plots=[plot("a"), plot("b")])
        ds.plots[0].layout_assigned = True
        ds.plots[0].layout_pattern = LayoutPattern.FLEXIBLE
        ds.plots[1].layout_assigned = True
        ds.plots[1].layout_pattern = None
        dist = category_distribution(ds, "land_use", "layout")
        assert dist == {"RESIDENTIAL": {"Flexible Layout": 1, "null": 1}}


class TestOutputs:
    def make_ds(self):
        return Dataset(
            plots=[
                plot("a", land_use="A", si=0.1, far=1.0, bcr=0.2, bcr_outlier=False, pta=0.5, ci=2.0),
                plot("b", land_use="B", si=0.5, far=2.0, bcr=0.6, bcr_outlier=False, pta=1.0, ci=8.0),
            ]
        )

    def test_csv_well_formed(self, tmp_path):
        stats = aggregate_stats(self.make_ds(), "land_use")
        path = tmp_path / "stats.csv"
        write_stats_csv(path, stats, "land_use")
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["land_use", "indicator", "count", "outliers", "min", "q1", "median", "q3", "max"]
        assert len(rows) == 1 + len(stats)
        # stored float strings round-trip exactly
        si_row = next(r for r in rows[1:] if r[0] == "A" and r[1] == "SI")
        assert float(si_row[6]) == 0.1

    def test_svg_deterministic(self):
        groups = ["A", "B"]
        summaries = [(0.0, 0.1, 0.2, 0.3, 0.4), (0.2, 0.3, 0.5, 0.7, 0.9)]
        a = boxplot_svg("t", groups, summaries, metadata={"k": 1})
        b = boxplot_svg("t", groups, summaries, metadata={"k": 1})
        assert a == b
        assert a.startswith("<svg ")
        assert "<metadata>" in a

    def test_stacked_bar_svg(self):
        svg = stacked_bar_svg("forms", {"A": {"Point": 3, "Slab": 1}})
        assert svg.count("<rect") >= 3
        assert "Point" in svg and "Slab" in svg

    def test_write_reports_full_set(self, tmp_path):
        paths = write_reports(self.make_ds(), tmp_path, "land_use", metadata={"h": "x"})
        names = {p.name for p in paths}
        assert "indicators_by_land_use.csv" in names
        assert "box_far_by_land_use.svg" in names
        assert "form_by_land_use.csv" in names
        assert "layout_by_land_use.svg" in names
        for p in paths:
            assert p.exists() and p.stat().st_size > 0

    def test_empty_dataset_headers_only(self, tmp_path):
        paths = write_reports(Dataset(), tmp_path, "subzone")
        csv_path = next(p for p in paths if p.name == "indicators_by_subzone.csv")
        with open(csv_path, newline="") as f:
            rows = list(csv.reader(f))
        assert len(rows) == 1  # header only
