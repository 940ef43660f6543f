"""Frozen layout-pattern fixtures shared by unit and acceptance tests.

Each builder returns (plot, buildings, expected pattern). Constructions
were tuned so the expected rule fires and every higher-priority cascade
predicate evaluates false (asserted by the tests that use them).
"""

from __future__ import annotations

import numpy as np

from sitemetrics.geometry import Polygon
from sitemetrics.records import BuildingRecord, LayoutPattern, PlotRecord


def square_plot(size=100.0, name="P"):
    ring = np.array([[0, 0], [size, 0], [size, size], [0, size], [0, 0]], dtype=float)
    p = PlotRecord(mp_name=name, land_use="X", subzone="Z", geometry=Polygon(ring))
    p.compute_morphology()
    return p


def building(bid, cx, cy, w, h, angle_deg=0.0, plot_id="P"):
    a = np.radians(angle_deg)
    u = np.array([np.cos(a), np.sin(a)])
    v = np.array([-np.sin(a), np.cos(a)])
    c = np.array([cx, cy])
    pts = [c - w / 2 * u - h / 2 * v, c + w / 2 * u - h / 2 * v, c + w / 2 * u + h / 2 * v, c - w / 2 * u + h / 2 * v]
    b = BuildingRecord(id=bid, parts=[Polygon(np.vstack(pts + [pts[0]]))])
    b.compute_morphology()
    b.plot_id = plot_id
    return b


def absolute_fixture():
    """Four identical buildings at mirrored positions."""
    bs = [
        building("q0", 30, 30, 12, 10),
        building("q1", 70, 30, 12, 10),
        building("q2", 30, 70, 12, 10),
        building("q3", 70, 70, 12, 10),
    ]
    return square_plot(), bs, LayoutPattern.ABSOLUTE_SYMMETRY


def circle_identical_fixture():
    """Eight identical point buildings evenly on a circle.

    Exactly mirror-symmetric, so the symmetry rule outranks the
    centripetal rule: hierarchy precedence documented by this fixture.
    """
    bs = []
    for k, ang in enumerate(np.arange(0.0, 360.0, 45.0)):
        cx = 50 + 30 * np.cos(np.radians(ang))
        cy = 50 + 30 * np.sin(np.radians(ang))
        bs.append(building(f"r{k}", cx, cy, 10, 10))
    return square_plot(), bs, LayoutPattern.ABSOLUTE_SYMMETRY


def centripetal_fixture():
    """Eight buildings on a ring with area and angular jitter.

    Jitter breaks every mirror axis (verified: no axis reaches the
    approximate thresholds) while radii stay equal, so radial CV is ~0.
    """
    jitter = [-5.02, 4.89, 7.22, 7.05, -18.27, 3.6, 10.38, 13.01]
    areas = [105.3, 77.8, 75.0, 89.4, 125.7, 98.4, 123.7, 97.6]
    radius = 32.04
    bs = []
    for k, (jit, area) in enumerate(zip(jitter, areas)):
        ang = 45.0 * k + jit
        s = float(np.sqrt(area))
        cx = 50 + radius * np.cos(np.radians(ang))
        cy = 50 + radius * np.sin(np.radians(ang))
        bs.append(building(f"c{k}", cx, cy, s, s))
    return square_plot(), bs, LayoutPattern.CENTRIPETAL


def axis_guided_fixture():
    """Five buildings strung along one dominant axis, unevenly spaced.

    Unequal spacing and pairwise-incompatible areas keep every mirror
    axis from qualifying; the principal axis explains > 95% of variance.
    """
    xs = [5, 20, 42, 78, 95]
    areas = [60, 140, 90, 200, 120]
    ars = [1.0, 2.0, 1.3, 3.0, 1.6]
    bs = []
    for k, (x, area, ar) in enumerate(zip(xs, areas, ars)):
        w = float(np.sqrt(area * ar))
        h = float(np.sqrt(area / ar))
        bs.append(building(f"a{k}", x, 30 + 0.04 * x, w, h))
    return square_plot(), bs, LayoutPattern.AXIS_GUIDED


def uniform_fixture():
    """Five equal-aspect-ratio slabs scattered irregularly."""
    pos = [(15, 12), (70, 25), (40, 55), (85, 80), (20, 85)]
    dims = [(30, 10), (24, 8), (36, 12), (21, 7), (27, 9)]  # AR 3.0 throughout
    angs = [15, 70, 140, 100, 40]
    bs = [building(f"u{k}", x, y, w, h, a) for k, ((x, y), (w, h), a) in enumerate(zip(pos, dims, angs))]
    return square_plot(), bs, LayoutPattern.UNIFORM_FORM


def flexible_fixture():
    """Two unrelated odd-shaped buildings fall through to the default."""
    bs = [building("f0", 20, 20, 12, 10), building("f1", 70, 60, 30, 10)]
    return square_plot(), bs, LayoutPattern.FLEXIBLE


def mixed_fixture():
    """A mirrored quartet inside an otherwise irregular composition."""
    bs = [
        building("m0", 35, 25, 10, 10),
        building("m1", 65, 25, 10, 10),
        building("m2", 35, 55, 10, 10),
        building("m3", 65, 55, 10, 10),
    ]
    areas = [150, 45, 260, 60, 350, 20]
    pos = [(12, 92), (52, 88), (95, 78), (88, 6), (5, 42), (47, 7)]
    for k, ((x, y), area) in enumerate(zip(pos, areas)):
        s = float(np.sqrt(area))
        bs.append(building(f"s{k}", x, y, s * 1.6, s / 1.6))
    return square_plot(), bs, LayoutPattern.MIXED


SPEC_FIXTURES = (
    absolute_fixture,
    circle_identical_fixture,
    centripetal_fixture,
    uniform_fixture,
    flexible_fixture,
)

ALL_FIXTURES = SPEC_FIXTURES + (axis_guided_fixture, mixed_fixture)
