"""Accessibility indicators: facility connectivity and transit walkability.

The connectivity index sums facility weight over straight-line distance in
kilometres (floored at 50 m so the term stays bounded) for every essential
facility within the search radius. Transit accessibility walks the road
graph: of the stops inside each mode's straight-line buffer, the score is
the fraction that is also reachable within the same distance on foot.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .config import IndicatorConfig
from .records import Dataset, PlotRecord, PoiRecord, TransitStop

UNREACHABLE = math.inf


# ---------------------------------------------------------------------------
# Connectivity index
# ---------------------------------------------------------------------------

def normalize_category(raw: str, cfg: IndicatorConfig) -> str | None:
    """Map a raw POI category onto one of the weighted facility classes."""
    key = raw.strip().lower()
    if key in cfg.poi_category_aliases:
        return cfg.poi_category_aliases[key]
    return key if key in cfg.facility_weights else None


def connectivity_index(plot: PlotRecord, pois: list[PoiRecord], cfg: IndicatorConfig) -> float:
    """Sum of weight / km-distance over in-radius facilities; 0 if none."""
    cx, cy = plot.centroid()
    radius = cfg.facility_radius_m
    floor_km = cfg.facility_distance_floor_m / 1000.0
    total = 0.0
    for poi in pois:
        category = normalize_category(poi.category, cfg)
        if category is None:
            continue
        d = math.hypot(poi.location[0] - cx, poi.location[1] - cy)
        if d > radius:
            continue
        d_km = max(d / 1000.0, floor_km)
        total += cfg.facility_weights[category] / d_km
    return total


# ---------------------------------------------------------------------------
# Road graph
# ---------------------------------------------------------------------------

@dataclass
class RoadGraph:
    """Undirected weighted graph over snapped road vertices."""

    nodes: np.ndarray  # (n, 2)
    adjacency: list[list[tuple[int, float]]]  # node -> [(neighbor, length)]
    edges: list[tuple[int, int, float]] = field(default_factory=list)
    snap_tol: float = 1.0

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


class _SnapGrid:
    """Hash grid merging vertices that fall within the snap tolerance."""

    def __init__(self, tol: float):
        self.tol = tol
        self.cell = max(tol, 1e-9)
        self.buckets: dict[tuple[int, int], list[int]] = {}
        self.points: list[tuple[float, float]] = []

    def _key(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor(x / self.cell)), int(math.floor(y / self.cell)))

    def node_for(self, x: float, y: float) -> int:
        kx, ky = self._key(x, y)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for idx in self.buckets.get((kx + dx, ky + dy), ()):
                    px, py = self.points[idx]
                    if math.hypot(px - x, py - y) <= self.tol:
                        return idx
        idx = len(self.points)
        self.points.append((x, y))
        self.buckets.setdefault((kx, ky), []).append(idx)
        return idx


def build_road_graph(roads, snap_tol: float = 1.0) -> RoadGraph:
    """Snap polyline vertices into shared nodes; one edge per segment.

    Vertices (endpoints and interior alike) within `snap_tol` of an
    existing node merge into it, so coincident junctions become real
    intersections. Edge weight is the segment length.
    """
    grid = _SnapGrid(snap_tol)
    edge_set: dict[tuple[int, int], float] = {}
    for road in roads:
        coords = np.asarray(road.coords, dtype=float)
        node_ids = [grid.node_for(float(x), float(y)) for x, y in coords]
        for a, b in zip(node_ids[:-1], node_ids[1:]):
            if a == b:
                continue  # segment collapsed by snapping
            length = float(
                math.hypot(
                    grid.points[a][0] - grid.points[b][0],
                    grid.points[a][1] - grid.points[b][1],
                )
            )
            key = (min(a, b), max(a, b))
            prev = edge_set.get(key)
            if prev is None or length < prev:
                edge_set[key] = length

    nodes = np.array(grid.points, dtype=float) if grid.points else np.empty((0, 2))
    adjacency: list[list[tuple[int, float]]] = [[] for _ in range(len(nodes))]
    edges = []
    for (a, b), length in sorted(edge_set.items()):
        adjacency[a].append((b, length))
        adjacency[b].append((a, length))
        edges.append((a, b, length))
    return RoadGraph(nodes=nodes, adjacency=adjacency, edges=edges, snap_tol=snap_tol)


def shortest_path_length(g: RoadGraph, sources: dict[int, float], targets: set[int]) -> dict[int, float]:
    """Multi-source Dijkstra; returns best distance for each target."""
    dist = {node: cost for node, cost in sources.items()}
    heap = [(cost, node) for node, cost in sources.items()]
    heapq.heapify(heap)
    remaining = set(targets)
    out: dict[int, float] = {}
    while heap and remaining:
        d, node = heapq.heappop(heap)
        if d > dist.get(node, UNREACHABLE):
            continue
        if node in remaining:
            out[node] = d
            remaining.discard(node)
        for nbr, w in g.adjacency[node]:
            nd = d + w
            if nd < dist.get(nbr, UNREACHABLE):
                dist[nbr] = nd
                heapq.heappush(heap, (nd, nbr))
    for t in remaining:
        out[t] = UNREACHABLE
    return out


@dataclass
class _Snap:
    edge: tuple[int, int]
    point: tuple[float, float]
    t: float  # fraction along edge from its first node
    length: float  # edge length
    offset: float  # straight-line leg from the query point to the snap point


def _snap_to_graph(g: RoadGraph, x: float, y: float, max_radius: float) -> _Snap | None:
    best: _Snap | None = None
    p = np.array([x, y])
    for a, b, length in g.edges:
        pa, pb = g.nodes[a], g.nodes[b]
        ab = pb - pa
        denom = float(np.dot(ab, ab))
        t = float(np.dot(p - pa, ab)) / denom if denom > 0 else 0.0
        t = min(1.0, max(0.0, t))
        q = pa + t * ab
        d = float(np.hypot(*(p - q)))
        if d <= max_radius and (best is None or d < best.offset):
            best = _Snap(edge=(a, b), point=(float(q[0]), float(q[1])), t=t, length=length, offset=d)
    return best


def network_distance(
    g: RoadGraph,
    origin: tuple[float, float],
    destination: tuple[float, float],
    snap_radius: float = 100.0,
) -> float:
    """Walking distance: snap legs plus shortest path over the road graph.

    Returns math.inf when either endpoint lies farther than `snap_radius`
    from every edge, or when the snapped components are disconnected.
    """
    s = _snap_to_graph(g, origin[0], origin[1], snap_radius)
    e = _snap_to_graph(g, destination[0], destination[1], snap_radius)
    if s is None or e is None:
        return UNREACHABLE

    best = UNREACHABLE
    if s.edge == e.edge:
        # direct run along the shared edge
        best = s.offset + abs(s.t - e.t) * s.length + e.offset

    a1, b1 = s.edge
    a2, b2 = e.edge
    sources = {a1: s.t * s.length, b1: (1.0 - s.t) * s.length}
    # merge duplicate keys keeping the cheaper entry (loop edges)
    dists = shortest_path_length(g, sources, {a2, b2})
    via_nodes = min(
        dists[a2] + e.t * e.length,
        dists[b2] + (1.0 - e.t) * e.length,
    )
    best = min(best, s.offset + via_nodes + e.offset)
    return best


# ---------------------------------------------------------------------------
# Public transit accessibility
# ---------------------------------------------------------------------------

@dataclass
class TransitAccess:
    pta: float
    buffer_counts: dict[str, int]
    accessible_counts: dict[str, int]


@dataclass
class AccessResult:
    ci: float
    pta: float
    buffer_counts: dict[str, int]
    accessible_counts: dict[str, int]


def transit_accessibility(
    plot: PlotRecord,
    g: RoadGraph,
    stops: list[TransitStop],
    cfg: IndicatorConfig,
) -> TransitAccess:
    """Reachable fraction of stops within each mode's buffer threshold."""
    cx, cy = plot.centroid()
    thresholds = cfg.transit_thresholds_m
    buffer_counts = {mode: 0 for mode in thresholds}
    accessible_counts = {mode: 0 for mode in thresholds}
    for stop in stops:
        limit = thresholds.get(stop.kind)
        if limit is None:
            continue
        straight = math.hypot(stop.location[0] - cx, stop.location[1] - cy)
        if straight > limit:
            continue
        buffer_counts[stop.kind] += 1
        walk = network_distance(g, (cx, cy), stop.location, cfg.endpoint_snap_radius_m)
        if walk <= limit:
            accessible_counts[stop.kind] += 1
    total = sum(buffer_counts.values())
    reachable = sum(accessible_counts.values())
    pta = reachable / total if total > 0 else 0.0
    return TransitAccess(pta=pta, buffer_counts=buffer_counts, accessible_counts=accessible_counts)


def compute_access(
    plot: PlotRecord,
    graph: RoadGraph,
    pois: list[PoiRecord],
    stops: list[TransitStop],
    cfg: IndicatorConfig,
) -> AccessResult:
    ci = connectivity_index(plot, pois, cfg)
    transit = transit_accessibility(plot, graph, stops, cfg)
    return AccessResult(
        ci=ci,
        pta=transit.pta,
        buffer_counts=transit.buffer_counts,
        accessible_counts=transit.accessible_counts,
    )


def run_access(ds: Dataset, cfg: IndicatorConfig) -> Dataset:
    graph = build_road_graph(ds.roads, cfg.road_snap_tol_m)
    for plot in ds.plots:
        result = compute_access(plot, graph, ds.pois, ds.stops, cfg)
        plot.ci = result.ci
        plot.pta = result.pta
        # the plot's connectivity score is carried by its buildings as well
        for b in ds.buildings:
            if b.plot_id == plot.mp_name:
                b.ci = result.ci
    return ds
