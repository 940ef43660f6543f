"""Planar computational-geometry kernel.

Everything downstream (form classes, layout symmetry, coverage ratios)
reduces to the primitives here: shoelace areas, area-weighted centroids,
convex hulls, minimum-area bounding rectangles and point/segment tests.
All coordinates are planar metres; rings are closed (first vertex equals
last).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    """Raised for degenerate or malformed geometry."""


def close_ring(coords: np.ndarray) -> np.ndarray:
    """Return a closed copy of a ring (appends the first vertex if needed)."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise GeometryError(f"ring must be an (n, 2) array, got shape {coords.shape}")
    if not np.allclose(coords[0], coords[-1]):
        coords = np.vstack([coords, coords[0]])
    return coords


@dataclass
class Polygon:
    """Single polygon: one exterior ring plus zero or more interior rings.

    Rings are stored closed. The exterior must have >= 4 vertices (a
    triangle plus the closing repeat).
    """

    exterior: np.ndarray
    interiors: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.exterior = close_ring(self.exterior)
        if len(self.exterior) < 4:
            raise GeometryError("exterior ring needs at least 3 distinct vertices")
        self.interiors = [close_ring(r) for r in self.interiors]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polygon):
            return NotImplemented
        return (
            np.array_equal(self.exterior, other.exterior)
            and len(self.interiors) == len(other.interiors)
            and all(np.array_equal(a, b) for a, b in zip(self.interiors, other.interiors))
        )

    def bounds(self) -> tuple[float, float, float, float]:
        xs, ys = self.exterior[:, 0], self.exterior[:, 1]
        return float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max())


@dataclass
class Mbr:
    """Minimum-area bounding rectangle.

    `angle` is the direction of the long axis measured counter-clockwise
    from east, folded into [0, 180).
    """

    center: tuple[float, float]
    length: float  # long side
    width: float  # short side
    angle: float

    @property
    def aspect_ratio(self) -> float:
        return self.length / self.width

    def corners(self) -> np.ndarray:
        """Rectangle corners in CCW order."""
        a = math.radians(self.angle)
        u = np.array([math.cos(a), math.sin(a)])  # long axis
        v = np.array([-math.sin(a), math.cos(a)])  # short axis
        c = np.asarray(self.center)
        hl, hw = self.length / 2.0, self.width / 2.0
        return np.array([c - hl * u - hw * v, c + hl * u - hw * v,
                         c + hl * u + hw * v, c - hl * u + hw * v])


# ---------------------------------------------------------------------------
# Areas and centroids
# ---------------------------------------------------------------------------

def ring_signed_area(ring: np.ndarray) -> float:
    """Shoelace signed area of a closed ring (positive if CCW)."""
    x, y = ring[:-1, 0], ring[:-1, 1]
    xn, yn = ring[1:, 0], ring[1:, 1]
    return float(np.sum(x * yn - xn * y) / 2.0)


def ring_length(ring: np.ndarray) -> float:
    return float(np.sum(np.hypot(np.diff(ring[:, 0]), np.diff(ring[:, 1]))))


def polygon_area(poly: Polygon) -> float:
    """Exterior area minus interior ring areas; always >= 0."""
    outer = abs(ring_signed_area(poly.exterior))
    if outer == 0.0:
        raise GeometryError("degenerate exterior ring (zero area)")
    return outer - sum(abs(ring_signed_area(r)) for r in poly.interiors)


def polygon_perimeter(poly: Polygon) -> float:
    """Exterior perimeter plus the lengths of the interior rings."""
    return ring_length(poly.exterior) + sum(ring_length(r) for r in poly.interiors)


def _ring_centroid_weighted(ring: np.ndarray) -> tuple[float, float, float]:
    """(signed_area, area*cx, area*cy) of one closed ring."""
    x, y = ring[:-1, 0], ring[:-1, 1]
    xn, yn = ring[1:, 0], ring[1:, 1]
    cross = x * yn - xn * y
    a = float(np.sum(cross) / 2.0)
    cx = float(np.sum((x + xn) * cross) / 6.0)
    cy = float(np.sum((y + yn) * cross) / 6.0)
    return a, cx, cy


def centroid(poly: Polygon) -> tuple[float, float]:
    """Area-weighted centroid with holes subtracted."""
    a_out, cx, cy = _ring_centroid_weighted(poly.exterior)
    sign = 1.0 if a_out > 0 else -1.0
    area = abs(a_out)
    cx, cy = sign * cx, sign * cy
    for ring in poly.interiors:
        a_i, cx_i, cy_i = _ring_centroid_weighted(ring)
        s_i = 1.0 if a_i > 0 else -1.0
        area -= abs(a_i)
        cx -= s_i * cx_i
        cy -= s_i * cy_i
    if area <= 0:
        raise GeometryError("zero-area polygon has no centroid")
    return cx / area, cy / area


def parts_area(parts: list[Polygon]) -> float:
    return sum(polygon_area(p) for p in parts)


def parts_perimeter(parts: list[Polygon]) -> float:
    return sum(polygon_perimeter(p) for p in parts)


def parts_centroid(parts: list[Polygon]) -> tuple[float, float]:
    """Area-weighted mean of the part centroids."""
    total = 0.0
    cx = cy = 0.0
    for p in parts:
        a = polygon_area(p)
        px, py = centroid(p)
        total += a
        cx += a * px
        cy += a * py
    if total <= 0:
        raise GeometryError("zero-area multipolygon has no centroid")
    return cx / total, cy / total


# ---------------------------------------------------------------------------
# Convex hull / minimum bounding rectangle
# ---------------------------------------------------------------------------

def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull by monotone chain; vertices CCW, no closing repeat.

    Raises GeometryError for fewer than 3 distinct points or a fully
    collinear set (callers fall back to line handling).
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 3:
        raise GeometryError("convex hull needs at least 3 distinct points")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def build(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2:
                a, b = out[-1] - out[-2], p - out[-2]
                if a[0] * b[1] - a[1] * b[0] > 0:
                    break
                out.pop()
            out.append(p)
        return out

    lower = build(pts)
    upper = build(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise GeometryError("points are collinear")
    return hull


def min_bounding_rect(poly: Polygon) -> Mbr:
    """Minimum-area enclosing rectangle via rotating calipers on the hull.

    The optimum rectangle has a side collinear with some hull edge, so it
    suffices to test each edge direction.
    """
    return mbr_of_points(poly.exterior[:-1])


def mbr_of_points(points: np.ndarray) -> Mbr:
    pts = np.asarray(points, dtype=float)
    try:
        hull = convex_hull(pts)
    except GeometryError as exc:
        raise GeometryError(f"cannot compute bounding rectangle: {exc}") from exc

    edges = np.diff(np.vstack([hull, hull[:1]]), axis=0)
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    valid = lengths > 0
    dirs = edges[valid] / lengths[valid, None]

    best = None
    for ux, uy in dirs:
        # rotate hull into the edge frame
        rx = hull[:, 0] * ux + hull[:, 1] * uy
        ry = -hull[:, 0] * uy + hull[:, 1] * ux
        w = rx.max() - rx.min()
        h = ry.max() - ry.min()
        area = w * h
        if best is None or area < best[0]:
            best = (area, ux, uy, rx.min(), rx.max(), ry.min(), ry.max())

    _, ux, uy, x0, x1, y0, y1 = best
    cx_r, cy_r = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    # rotate the center back to world coordinates
    cx = cx_r * ux - cy_r * uy
    cy = cx_r * uy + cy_r * ux
    w, h = x1 - x0, y1 - y0
    if w >= h:
        length, width = w, h
        axis = (ux, uy)
    else:
        length, width = h, w
        axis = (-uy, ux)
    angle = math.degrees(math.atan2(axis[1], axis[0])) % 180.0
    if width <= 0:
        raise GeometryError("degenerate geometry has zero-width bounding rectangle")
    return Mbr(center=(cx, cy), length=float(length), width=float(width), angle=float(angle))


def orientation_from_mbr(mbr: Mbr) -> float:
    """Bearing of the MBR long axis, clockwise from north, in [0, 360).

    The reported axis direction is the one with positive northing; a due
    east-west axis reports 90.
    """
    # mbr.angle in [0, 180) from east; sin(angle) >= 0 so the axis already
    # points into the upper half-plane. angle == 0 means due east-west.
    return (90.0 - mbr.angle) % 360.0


# ---------------------------------------------------------------------------
# Point / segment predicates
# ---------------------------------------------------------------------------

def point_on_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    ab = b - a
    ap = p - a
    cross = ab[0] * ap[1] - ab[1] * ap[0]
    if abs(cross) > tol * max(1.0, float(np.hypot(*ab))):
        return False
    dot = float(np.dot(ap, ab))
    return -tol <= dot <= float(np.dot(ab, ab)) + tol


def point_in_ring(point, ring: np.ndarray, boundary: bool = True) -> bool:
    """Ray-casting test; points on the boundary count as inside iff `boundary`."""
    px, py = float(point[0]), float(point[1])
    p = np.array([px, py])
    inside = False
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        if point_on_segment(p, a, b):
            return boundary
        ay, by = a[1], b[1]
        if (ay > py) != (by > py):
            x_cross = a[0] + (py - ay) * (b[0] - a[0]) / (by - ay)
            if px < x_cross:
                inside = not inside
    return inside


def point_in_polygon(point, poly: Polygon, boundary: bool = True) -> bool:
    """True if the point is inside the polygon (holes excluded).

    Points on the exterior or on a hole edge count as inside iff `boundary`.
    """
    if not point_in_ring(point, poly.exterior, boundary=boundary):
        return False
    for ring in poly.interiors:
        if point_in_ring(point, ring, boundary=False):
            return False  # strictly inside a hole
        if point_on_ring_boundary(point, ring):
            return boundary
    return True


def point_on_ring_boundary(point, ring: np.ndarray, tol: float = 1e-9) -> bool:
    p = np.array([float(point[0]), float(point[1])])
    return any(point_on_segment(p, ring[i], ring[i + 1], tol) for i in range(len(ring) - 1))


def point_segment_distance(p, a, b) -> float:
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(np.dot(ab, ab))
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = float(np.dot(p - a, ab)) / denom
    t = min(1.0, max(0.0, t))
    return float(np.hypot(*(p - (a + t * ab))))


def point_polygon_distance(point, poly: Polygon) -> float:
    """Distance from a point to a polygon (0 if inside)."""
    if point_in_polygon(point, poly):
        return 0.0
    rings = [poly.exterior] + poly.interiors
    return min(
        point_segment_distance(point, ring[i], ring[i + 1])
        for ring in rings
        for i in range(len(ring) - 1)
    )


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if v == 0 else (1 if v > 0 else -1)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    for a, b, c in ((p1, p2, q1), (p1, p2, q2), (q1, q2, p1), (q1, q2, p2)):
        if point_on_segment(np.asarray(c, float), np.asarray(a, float), np.asarray(b, float)):
            return True
    return False


def _segment_distance(p1, p2, q1, q2) -> float:
    if _segments_intersect(p1, p2, q1, q2):
        return 0.0
    return min(
        point_segment_distance(p1, q1, q2),
        point_segment_distance(p2, q1, q2),
        point_segment_distance(q1, p1, p2),
        point_segment_distance(q2, p1, p2),
    )


def polygon_distance(a: Polygon, b: Polygon) -> float:
    """Minimum distance between two polygons (0 if they touch or overlap)."""
    if point_in_polygon(a.exterior[0], b) or point_in_polygon(b.exterior[0], a):
        return 0.0
    best = math.inf
    ea, eb = a.exterior, b.exterior
    for i in range(len(ea) - 1):
        for j in range(len(eb) - 1):
            d = _segment_distance(ea[i], ea[i + 1], eb[j], eb[j + 1])
            if d == 0.0:
                return 0.0
            best = min(best, d)
    return best
