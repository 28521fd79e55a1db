"""Sharp-edge detection by dihedral deviation and salient point sampling along those edges."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .mesh import SurfaceSamples, TriMesh

log = logging.getLogger(__name__)

EDGE_SAMPLE, CORNER, FALLBACK = "edge-sample", "corner", "fallback"


@dataclass
class SharpEdgeSet:
    """Sharp edges as sorted vertex-id pairs.

    ``deviation`` is the angle in degrees between the two incident face
    normals (0 for coplanar faces); boundary edges are reported as 180.
    """

    edges: np.ndarray
    deviation: np.ndarray
    boundary: np.ndarray
    non_manifold: list = field(default_factory=list)

    def __len__(self):
        return len(self.edges)

    def segments(self, mesh: TriMesh) -> np.ndarray:
        return mesh.vertices[self.edges]


@dataclass
class SalientCloud:
    points: np.ndarray
    provenance: list

    def __len__(self):
        return len(self.points)


def edge_faces(mesh: TriMesh):
    """Map every undirected edge (a, b), a < b, to the faces that use it."""
    f = mesh.faces
    e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    e.sort(axis=1)
    fid = np.tile(np.arange(len(f)), 3)
    order = np.lexsort((fid, e[:, 1], e[:, 0]))
    e, fid = e[order], fid[order]
    uniq, start, counts = np.unique(e, axis=0, return_index=True, return_counts=True)
    return uniq, start, counts, fid


def dihedral_deviation(mesh: TriMesh) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (edges, deviation in degrees, incident face count) for every edge."""
    edges, start, counts, fid = edge_faces(mesh)
    dev = np.full(len(edges), 180.0)
    two = counts == 2
    n = mesh.face_normals
    a, b = fid[start[two]], fid[start[two] + 1]
    cos = np.clip(np.einsum("ij,ij->i", n[a], n[b]), -1.0, 1.0)
    dev[two] = np.degrees(np.arccos(cos))
    return edges, dev, counts


def detect_sharp_edges(mesh: TriMesh, threshold_deg: float = 15.0) -> SharpEdgeSet:
    """Flag interior edges whose dihedral deviation reaches ``threshold_deg``.

    Boundary edges are always sharp. Edges with more than two incident
    faces are skipped and listed in ``non_manifold``.
    """
    if threshold_deg <= 0:
        raise ValueError("threshold_deg must be positive")
    edges, dev, counts = dihedral_deviation(mesh)
    bad = counts > 2
    if bad.any():
        log.warning("skipping %d non-manifold edges", int(bad.sum()))
    sharp = ((counts == 2) & (dev >= threshold_deg)) | (counts == 1)
    return SharpEdgeSet(
        edges=edges[sharp],
        deviation=dev[sharp],
        boundary=counts[sharp] == 1,
        non_manifold=[tuple(e) for e in edges[bad].tolist()],
    )


def sample_salient(
    mesh: TriMesh, sharp: SharpEdgeSet, spacing: float = 0.02, seed: int | None = 0
) -> SalientCloud:
    """Place points along every sharp edge at intervals no longer than ``spacing``.

    Edge endpoints are mesh vertices and are emitted once even when shared
    by several sharp edges. Placement is fixed-spacing, so ``seed`` has no
    effect; it is accepted to keep the sampling signatures uniform.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    pts, prov, seen = [], [], set()
    verts = mesh.vertices
    for a, b in sharp.edges.tolist():
        p, q = verts[a], verts[b]
        nseg = max(1, int(np.ceil(np.linalg.norm(q - p) / spacing - 1e-9)))
        t = np.arange(nseg + 1) / nseg
        line = p + t[:, None] * (q - p)
        line[-1] = q
        if a not in seen:
            seen.add(a)
            pts.append(line[:1])
            prov.append(CORNER)
        pts.append(line[1:-1])
        prov += [EDGE_SAMPLE] * (nseg - 1)
        if b not in seen:
            seen.add(b)
            pts.append(line[-1:])
            prov.append(CORNER)
    points = np.concatenate(pts) if pts else np.zeros((0, 3))
    return SalientCloud(points, prov)


def face_curvature_proxy(mesh: TriMesh) -> np.ndarray:
    """Per face: 1 - min cosine between its normal and its edge-neighbours' normals."""
    edges, start, counts, fid = edge_faces(mesh)
    n = mesh.face_normals
    score = np.zeros(mesh.n_faces)
    two = counts == 2
    a, b = fid[start[two]], fid[start[two] + 1]
    s = 1.0 - np.einsum("ij,ij->i", n[a], n[b])
    np.maximum.at(score, a, s)
    np.maximum.at(score, b, s)
    return score


def fallback_salient(mesh: TriMesh, samples: SurfaceSamples, fraction: float = 0.1) -> SalientCloud:
    """Keep the top ``fraction`` of uniform samples ranked by the face curvature proxy.

    Used when a mesh has no sharp edges so the pipeline still has input.
    """
    score = face_curvature_proxy(mesh)[samples.face_ids]
    k = max(1, int(round(fraction * len(samples))))
    order = np.lexsort((np.arange(len(score)), -score))[:k]
    order.sort()
    return SalientCloud(samples.positions[order], [FALLBACK] * k)

