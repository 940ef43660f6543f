"""Bounding-box tree (STR-packed) for candidate lookups.

Queries return every stored item whose bounding box intersects the query
box: a superset of the true geometric hits, which callers refine with
exact tests. Bulk-loaded once per layer; immutable afterwards.
"""

from __future__ import annotations

import numpy as np

_NODE_CAPACITY = 8

Box = tuple[float, float, float, float]  # (xmin, ymin, xmax, ymax)


def boxes_intersect(a: Box, b: Box) -> bool:
    return a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]


class _Node:
    __slots__ = ("box", "children", "items")

    def __init__(self, box: Box, children: list["_Node"] | None, items: list[int] | None):
        self.box = box
        self.children = children
        self.items = items


def _merge_boxes(boxes: list[Box]) -> Box:
    arr = np.asarray(boxes)
    return (
        float(arr[:, 0].min()),
        float(arr[:, 1].min()),
        float(arr[:, 2].max()),
        float(arr[:, 3].max()),
    )


class SpatialIndex:
    """Static R-tree over (index, bounding box) pairs, STR bulk-loaded."""

    def __init__(self, boxes: list[Box]):
        self._boxes = [tuple(float(v) for v in b) for b in boxes]
        self._root = self._build(list(range(len(self._boxes)))) if self._boxes else None

    def _build(self, idxs: list[int]) -> _Node:
        if len(idxs) <= _NODE_CAPACITY:
            return _Node(_merge_boxes([self._boxes[i] for i in idxs]), None, idxs)

        # Sort-Tile-Recursive packing: sort by center x, slice into vertical
        # strips, sort each strip by center y, cut into leaf-sized runs.
        centers = np.array(
            [((self._boxes[i][0] + self._boxes[i][2]) / 2.0, (self._boxes[i][1] + self._boxes[i][3]) / 2.0) for i in idxs]
        )
        order = sorted(range(len(idxs)), key=lambda k: (centers[k][0], centers[k][1], idxs[k]))
        n_leaves = -(-len(idxs) // _NODE_CAPACITY)
        n_strips = max(1, int(np.ceil(np.sqrt(n_leaves))))
        strip_size = -(-len(idxs) // n_strips)

        children: list[_Node] = []
        for s in range(0, len(order), strip_size):
            strip = order[s : s + strip_size]
            strip.sort(key=lambda k: (centers[k][1], centers[k][0], idxs[k]))
            for t in range(0, len(strip), _NODE_CAPACITY):
                leaf_idxs = [idxs[k] for k in strip[t : t + _NODE_CAPACITY]]
                children.append(_Node(_merge_boxes([self._boxes[i] for i in leaf_idxs]), None, leaf_idxs))

        while len(children) > _NODE_CAPACITY:
            grouped: list[_Node] = []
            for g in range(0, len(children), _NODE_CAPACITY):
                group = children[g : g + _NODE_CAPACITY]
                grouped.append(_Node(_merge_boxes([c.box for c in group]), group, None))
            children = grouped
        return _Node(_merge_boxes([c.box for c in children]), children, None)

    def query(self, box: Box) -> list[int]:
        """Indices of all items whose box intersects `box`, ascending."""
        if self._root is None:
            return []
        out: list[int] = []
        stack = [self._root]
        while stack:
            node = stack.pop()
            if not boxes_intersect(node.box, box):
                continue
            if node.items is not None:
                out.extend(i for i in node.items if boxes_intersect(self._boxes[i], box))
            else:
                stack.extend(node.children)
        out.sort()
        return out

    def query_point(self, x: float, y: float) -> list[int]:
        return self.query((x, y, x, y))

    def __len__(self) -> int:
        return len(self._boxes)
