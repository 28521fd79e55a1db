"""Collinear point culling and endpoint-proximity stroke merging."""

from __future__ import annotations

import numpy as np

from .sketch import Stroke

JUNCTION_EPS = 1e-9


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return 1.0 - float(u @ v) / (nu * nv)


def cull_collinear(stroke: Stroke, cos_dist_threshold: float = 0.04) -> Stroke:
    """Drop interior points where the path barely turns.

    One left-to-right sweep: point i is removed when the cosine distance
    between (p_i - last kept point) and (p_{i+1} - p_i) is below the
    threshold. Endpoints are always kept.
    """
    if not 0 < cos_dist_threshold < 2:
        raise ValueError("cos_dist_threshold must be in (0, 2)")
    pts = stroke.points
    if len(pts) <= 2:
        return Stroke(pts.copy(), stroke.id)
    keep = [0]
    last = pts[0]
    for i in range(1, len(pts) - 1):
        if cosine_distance(pts[i] - last, pts[i + 1] - pts[i]) >= cos_dist_threshold:
            keep.append(i)
            last = pts[i]
    keep.append(len(pts) - 1)
    return Stroke(pts[keep].copy(), stroke.id)


def _join(a: Stroke, end_a: int, b: Stroke, end_b: int) -> Stroke:
    # orient so that a's joined end is its last point and b's joined end is its first
    pa = a.points if end_a == 1 else a.points[::-1]
    pb = b.points if end_b == 0 else b.points[::-1]
    if np.linalg.norm(pa[-1] - pb[0]) < JUNCTION_EPS:
        pb = pb[1:]
    return Stroke(np.concatenate([pa, pb]), min(a.id, b.id))


def _closest_pair(strokes: list[Stroke], threshold: float):
    ends = np.stack([np.stack([s.start, s.end]) for s in strokes])  # (S, 2, 3)
    flat = ends.reshape(-1, 3)
    d = np.linalg.norm(flat[:, None] - flat[None], axis=-1)
    owner = np.repeat(np.arange(len(strokes)), 2)
    d[owner[:, None] == owner[None, :]] = np.inf
    ids = np.array([s.id for s in strokes])
    best = None
    for i, j in zip(*np.nonzero(d <= threshold)):
        if i >= j:
            continue
        si, sj = owner[i], owner[j]
        # ties: lower (stroke id, endpoint index) wins
        key = (d[i, j], min((ids[si], i % 2), (ids[sj], j % 2)), max((ids[si], i % 2), (ids[sj], j % 2)))
        if best is None or key < best[0]:
            best = (key, si, i % 2, sj, j % 2)
    return best


def merge_strokes(strokes: list[Stroke], endpoint_threshold: float = 0.02) -> list[Stroke]:
    """Greedily join strokes whose endpoints lie within ``endpoint_threshold``.

    The closest qualifying endpoint pair is joined first, one join per
    pass, until no pair qualifies. A stroke is never joined to itself.
    The merged stroke keeps the lower id; output is sorted by id.
    """
    if endpoint_threshold < 0:
        raise ValueError("endpoint_threshold must be >= 0")
    work = sorted((Stroke(s.points.copy(), s.id) for s in strokes), key=lambda s: s.id)
    # points sitting exactly at the threshold still merge; float noise would otherwise decide
    limit = endpoint_threshold * (1 + 1e-9) if endpoint_threshold > 0 else JUNCTION_EPS * 0.999
    while len(work) > 1:
        best = _closest_pair(work, limit)
        if best is None:
            break
        _, si, ea, sj, eb = best
        a, b = work[si], work[sj]
        if b.id < a.id:
            a, ea, b, eb = b, eb, a, ea
        merged = _join(a, ea, b, eb)
        work = sorted([s for k, s in enumerate(work) if k not in (si, sj)] + [merged], key=lambda s: s.id)
    return work
