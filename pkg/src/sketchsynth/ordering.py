"""Stroke drawing order from an endpoint proximity graph and a randomized depth-first walk."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .sketch import Sketch, Stroke


@dataclass
class StrokeGraph:
    """Undirected endpoint graph.

    ``edges`` holds (stroke a, end of a, stroke b, end of b, distance) with
    a < b; end 0 is a stroke's first point and end 1 its last.
    """

    n_strokes: int
    edges: list[tuple[int, int, int, int, float]] = field(default_factory=list)

    def neighbors(self) -> list[dict[int, float]]:
        """Per stroke, the closest endpoint distance to each adjacent stroke."""
        adj: list[dict[int, float]] = [{} for _ in range(self.n_strokes)]
        for a, _, b, _, d in self.edges:
            if d < adj[a].get(b, np.inf):
                adj[a][b] = d
                adj[b][a] = d
        return adj


def _endpoints(strokes) -> np.ndarray:
    return np.array([[s.points[0], s.points[-1]] for s in strokes]).reshape(-1, 3)


def build_graph(strokes: list[Stroke], k: int = 3) -> StrokeGraph:
    """Link each endpoint to its ``k`` nearest endpoints on other strokes, then symmetrize."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(strokes)
    if n < 2:
        return StrokeGraph(n)
    ends = _endpoints(strokes)
    tree = cKDTree(ends)
    q = min(len(ends), k + 2)
    dist, idx = tree.query(ends, k=q)
    dist, idx = dist.reshape(len(ends), q), idx.reshape(len(ends), q)
    edges = {}
    for e in range(len(ends)):
        s = e // 2
        others = [(float(np.linalg.norm(ends[e] - ends[j])), int(j)) for j in idx[e] if j // 2 != s]
        others.sort()
        for d, j in others[:k]:
            a, b = (e, j) if e < j else (j, e)
            edges[(a, b)] = d
    out = [(a // 2, a % 2, b // 2, b % 2, d) for (a, b), d in sorted(edges.items())]
    return StrokeGraph(n, out)


def lowest_endpoint_key(stroke: Stroke) -> tuple:
    """Sort key of the stroke's lowest endpoint: min y, then x, then z."""
    return min((p[1], p[0], p[2]) for p in (stroke.points[0], stroke.points[-1]))


@dataclass
class Traversal:
    order: list[int]
    # per choice among >= 2 unvisited neighbours: (candidate count, whether the nearest was taken)
    decisions: list[tuple[int, bool]]


def traverse(graph: StrokeGraph, strokes: list[Stroke], skip_prob: float, rng) -> Traversal:
    """Depth-first walk that passes over the nearest unvisited neighbour with probability ``skip_prob``.

    One draw per decision: on a skip the walk falls through to the second
    nearest candidate. A lone candidate is always taken, so a skip never
    stalls the walk. Components are entered at the stroke with the lowest
    endpoint.
    """
    n = len(strokes)
    adj = graph.neighbors()
    keys = [lowest_endpoint_key(s) for s in strokes]
    visited = np.zeros(n, dtype=bool)
    order, decisions, stack = [], [], []
    while len(order) < n:
        if not stack:
            start = min((keys[i], i) for i in range(n) if not visited[i])[1]
            visited[start] = True
            order.append(start)
            stack.append(start)
            continue
        cur = stack[-1]
        cands = sorted((d, j) for j, d in adj[cur].items() if not visited[j])
        if not cands:
            stack.pop()
            continue
        choice = cands[0][1]
        if len(cands) > 1:
            if rng.random() < skip_prob:
                choice = cands[1][1]
            decisions.append((len(cands), choice == cands[0][1]))
        visited[choice] = True
        order.append(choice)
        stack.append(choice)
    return Traversal(order, decisions)


def orient(strokes: list[Stroke], order: list[int]) -> list[Stroke]:
    """Flip strokes so each starts at the endpoint nearer the previous stroke's last point."""
    out = []
    for rank, i in enumerate(order):
        s = strokes[i]
        pts = s.points
        if rank == 0:
            lo = (pts[-1][1], pts[-1][0], pts[-1][2]) < (pts[0][1], pts[0][0], pts[0][2])
            if lo:
                pts = pts[::-1]
        else:
            prev = out[-1].points[-1]
            if np.linalg.norm(pts[-1] - prev) < np.linalg.norm(pts[0] - prev):
                pts = pts[::-1]
        out.append(Stroke(pts.copy(), s.id))
    return out


def order_strokes(
    graph: StrokeGraph,
    strokes: list[Stroke],
    skip_prob: float = 0.1,
    seed: int | None = 0,
) -> Sketch:
    if not 0 <= skip_prob < 1:
        raise ValueError("skip_prob must be in [0, 1)")
    walk = traverse(graph, strokes, skip_prob, np.random.default_rng(seed))
    return Sketch(orient(strokes, walk.order))
