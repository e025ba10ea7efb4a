"""Marching-squares level contours of a node-centered scalar field.

Cells are the grid squares between nodes.  A node is "inside" when its value
is >= the level; crossing points are placed by linear interpolation along
cell edges.  Each physical edge is interpolated once and shared by the two
adjacent cells, so segments chain exactly.  The two ambiguous saddle cases
are resolved by the cell-average rule: if the mean of the four corners is
inside, the inside corners are connected, otherwise separated.
"""

from __future__ import annotations

import numpy as np

from .grid import Grid2D

# Segment tables, keyed by the 4-bit inside pattern BL=1, BR=2, TR=4, TL=8.
# Entries are pairs of local edge ids: 0=bottom, 1=right, 2=top, 3=left.
_SEGMENTS = {
    0: [],
    1: [(3, 0)],
    2: [(0, 1)],
    3: [(3, 1)],
    4: [(1, 2)],
    6: [(0, 2)],
    7: [(3, 2)],
    8: [(2, 3)],
    9: [(2, 0)],
    11: [(2, 1)],
    12: [(1, 3)],
    13: [(1, 0)],
    14: [(0, 3)],
    15: [],
}
_SADDLE_5 = {True: [(3, 2), (1, 0)], False: [(3, 0), (1, 2)]}
_SADDLE_10 = {True: [(0, 3), (2, 1)], False: [(0, 1), (2, 3)]}


def _edge_key(cell_i: int, cell_j: int, local: int) -> tuple[str, int, int]:
    # Horizontal edges keyed ('h', j, i) between nodes (i,j)-(i+1,j);
    # vertical edges ('v', j, i) between (i,j)-(i,j+1).
    if local == 0:
        return ("h", cell_j, cell_i)
    if local == 2:
        return ("h", cell_j + 1, cell_i)
    if local == 3:
        return ("v", cell_j, cell_i)
    return ("v", cell_j, cell_i + 1)


def marching_squares(grid: Grid2D, values: np.ndarray, level: float) -> list[np.ndarray]:
    """Extract the level set as a list of (k, 2) polyline coordinate arrays."""
    v = np.asarray(values, dtype=float)
    ny, nx = v.shape
    inside = v >= level
    xs, ys = grid.xs, grid.ys

    # Interpolated crossing point per edge, computed once.
    points: dict[tuple[str, int, int], tuple[float, float]] = {}

    def crossing(key):
        if key in points:
            return points[key]
        kind, j, i = key
        if kind == "h":
            v0, v1 = v[j, i], v[j, i + 1]
            t = (level - v0) / (v1 - v0)
            pt = (xs[i] + t * (xs[i + 1] - xs[i]), ys[j])
        else:
            v0, v1 = v[j, i], v[j + 1, i]
            t = (level - v0) / (v1 - v0)
            pt = (xs[i], ys[j] + t * (ys[j + 1] - ys[j]))
        points[key] = pt
        return pt

    # Build segments as pairs of edge keys.
    segments: list[tuple[tuple, tuple]] = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            code = (
                (1 if inside[j, i] else 0)
                | (2 if inside[j, i + 1] else 0)
                | (4 if inside[j + 1, i + 1] else 0)
                | (8 if inside[j + 1, i] else 0)
            )
            if code == 5:
                avg = 0.25 * (v[j, i] + v[j, i + 1] + v[j + 1, i + 1] + v[j + 1, i])
                segs = _SADDLE_5[avg >= level]
            elif code == 10:
                avg = 0.25 * (v[j, i] + v[j, i + 1] + v[j + 1, i + 1] + v[j + 1, i])
                segs = _SADDLE_10[avg >= level]
            else:
                segs = _SEGMENTS[code]
            for a, b in segs:
                segments.append((_edge_key(i, j, a), _edge_key(i, j, b)))

    # Chain segments on shared edge keys into polylines.
    adjacency: dict[tuple, list[tuple]] = {}
    for a, b in segments:
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)

    visited = set()
    polylines = []

    def walk(start):
        path = [start]
        cur = start
        while True:
            nxt = None
            for cand in adjacency[cur]:
                edge = frozenset((cur, cand))
                if edge not in visited:
                    nxt = cand
                    visited.add(edge)
                    break
            if nxt is None:
                break
            path.append(nxt)
            cur = nxt
        return path

    endpoints = sorted(k for k, nbrs in adjacency.items() if len(nbrs) == 1)
    for key in endpoints:
        if any(frozenset((key, n)) not in visited for n in adjacency[key]):
            polylines.append(walk(key))
    for key in sorted(adjacency):  # remaining closed loops
        if any(frozenset((key, n)) not in visited for n in adjacency[key]):
            loop = walk(key)
            if loop[-1] != loop[0]:
                loop.append(loop[0])
            polylines.append(loop)

    out = []
    for path in polylines:
        pts = np.array([crossing(k) for k in path])
        out.append(pts)
    return out
