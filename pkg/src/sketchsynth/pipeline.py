"""Mesh to ordered sketch: sampling, saliency, fitting, culling, merging, ordering."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import mesh as meshmod
from .ordering import build_graph, order_strokes
from .saliency import detect_sharp_edges, fallback_salient, sample_salient
from .sketch import Sketch, Stroke
from .spline import chain_points, fit_all
from .stroke_post import cull_collinear, merge_strokes

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    pass


@dataclass
class PipelineParams:
    samples: int = 2048
    sharp_threshold_deg: float = 15.0
    salient_spacing: float = 0.02
    link_radius: float = 0.02
    min_seg_len: int = 12
    fit_rms_max: float = 0.01
    cull_cos_dist: float = 0.04
    merge_threshold: float = 0.02
    skip_prob: float = 0.1
    knn: int = 3
    fallback_fraction: float = 0.1


@dataclass
class PipelineResult:
    sketch: Sketch
    stats: dict = field(default_factory=dict)


def run_pipeline(mesh: meshmod.TriMesh, params: PipelineParams | None = None, seed: int = 0, mesh_id: str = "") -> PipelineResult:
    p = params or PipelineParams()
    m = meshmod.normalize(mesh)
    uniform = meshmod.sample_surface(m, p.samples, seed)
    sharp = detect_sharp_edges(m, p.sharp_threshold_deg)
    if len(sharp):
        cloud = sample_salient(m, sharp, p.salient_spacing, seed)
        link = p.link_radius
    else:
        log.info("%s: no sharp edges, using curvature fallback", mesh_id or "mesh")
        cloud = fallback_salient(m, uniform, p.fallback_fraction)
        link = max(p.link_radius, _fallback_radius(cloud.points))
    chains = chain_points(cloud, link)
    fitted, rejects = fit_all(chains, p.min_seg_len, p.fit_rms_max)
    polylines = [f.samples for f in fitted]
    if not polylines:
        # keep the pipeline from emitting an empty sketch on meshes with only short features
        polylines = [c.points for c in rejects if len(c) >= 2]
    if not polylines:
        raise PipelineError(f"{mesh_id or 'mesh'}: no strokes could be extracted")
    strokes = [
        Stroke(np.clip(pts + 0.5, 0.0, 1.0), i) for i, pts in enumerate(polylines)
    ]
    culled = [cull_collinear(s, p.cull_cos_dist) for s in strokes]
    merged = merge_strokes(culled, p.merge_threshold)
    graph = build_graph(merged, p.knn)
    sketch = order_strokes(graph, merged, p.skip_prob, seed)
    sketch.meta = {"source": mesh_id, "seed": int(seed), "params": asdict(p)}
    stats = {
        "sharp_edges": len(sharp),
        "non_manifold_edges": len(sharp.non_manifold),
        "salient_points": len(cloud),
        "chains": len(chains),
        "fitted": sum(f.control is not None for f in fitted),
        "raw_pieces": sum(f.control is None for f in fitted),
        "rejects": len(rejects),
        "strokes": len(sketch),
        "points": sketch.n_points,
        "fallback": not len(sharp),
    }
    return PipelineResult(sketch, stats)


def _fallback_radius(points: np.ndarray) -> float:
    """Twice the median nearest-neighbour spacing of a scattered cloud."""
    if len(points) < 2:
        return 0.0
    d, _ = cKDTree(points).query(points, k=2)
    return 2.0 * float(np.median(d[:, 1]))


def generate_sketch(mesh: meshmod.TriMesh, params: PipelineParams | None = None, seed: int = 0, mesh_id: str = "") -> Sketch:
    return run_pipeline(mesh, params, seed, mesh_id).sketch
