"""Projection tests: registry anchor, inverse round-trip, arc-length oracle."""

import numpy as np
import pytest

from sitemetrics.projection import SVY21, ProjectionError, project_lonlat, unproject_xy

from oracles import meridian_arc_quadrature

ORIGIN_LON = 103.0 + 50.0 / 60.0
ORIGIN_LAT = 1.0 + 22.0 / 60.0


class TestForward:
    def test_origin_maps_to_false_offsets(self):
        x, y = project_lonlat(ORIGIN_LON, ORIGIN_LAT)
        assert x == pytest.approx(28001.642, abs=1e-9)
        assert y == pytest.approx(38744.572, abs=1e-9)

    def test_latitude_step_matches_meridian_arc(self):
        _, y0 = project_lonlat(ORIGIN_LON, ORIGIN_LAT)
        _, y1 = project_lonlat(ORIGIN_LON, ORIGIN_LAT + 0.001)
        arc = meridian_arc_quadrature(ORIGIN_LAT, ORIGIN_LAT + 0.001)
        assert y1 - y0 == pytest.approx(arc, abs=0.5)
        assert y1 - y0 == pytest.approx(110.6, abs=0.5)

    def test_east_of_origin_increases_x(self):
        x0, _ = project_lonlat(ORIGIN_LON, 1.3)
        x1, _ = project_lonlat(ORIGIN_LON + 0.01, 1.3)
        assert x1 > x0

    def test_out_of_range_rejected(self):
        with pytest.raises(ProjectionError):
            project_lonlat(181.0, 1.0)
        with pytest.raises(ProjectionError):
            project_lonlat(103.0, 90.0)


class TestRoundTrip:
    def test_reference_point(self):
        lon, lat = unproject_xy(*project_lonlat(103.799, 1.277))
        assert abs(lon - 103.799) < 1e-9
        assert abs(lat - 1.277) < 1e-9

    def test_grid_of_points(self):
        lons = np.linspace(103.6, 104.1, 7)
        lats = np.linspace(1.15, 1.48, 7)
        for lon in lons:
            for lat in lats:
                got_lon, got_lat = unproject_xy(*project_lonlat(float(lon), float(lat)))
                assert abs(got_lon - lon) < 1e-9
                assert abs(got_lat - lat) < 1e-9

    def test_inverse_of_forward_xy(self):
        # forward(inverse(x, y)) back within a micron near the working area
        for x, y in [(28001.642, 38744.572), (21000.0, 30000.0), (35000.0, 45000.0)]:
            lon, lat = unproject_xy(x, y)
            gx, gy = project_lonlat(lon, lat)
            assert gx == pytest.approx(x, abs=1e-6)
            assert gy == pytest.approx(y, abs=1e-6)


class TestCustomGrid:
    def test_scale_factor_applies(self):
        from sitemetrics.projection import TransverseMercator

        utm_like = TransverseMercator(
            lat_origin=0.0, lon_origin=103.0, scale=0.9996, false_easting=500000.0, false_northing=0.0
        )
        x, y = utm_like.forward(103.0, 0.0)
        assert x == pytest.approx(500000.0, abs=1e-9)
        assert y == pytest.approx(0.0, abs=1e-9)
        lon, lat = utm_like.inverse(*utm_like.forward(103.4, 1.1))
        assert lon == pytest.approx(103.4, abs=1e-9)
        assert lat == pytest.approx(1.1, abs=1e-9)
