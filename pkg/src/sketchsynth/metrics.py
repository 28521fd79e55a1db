"""Point-set evaluation: bounding-box alignment, Chamfer distance and F-score.

Chamfer uses squared Euclidean nearest-neighbour distances; F-score
thresholds un-squared distances. Reports carry both Chamfer variants.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial import cKDTree

from .mesh import TriMesh, normalize, sample_surface

CONVENTIONS = "chamfer: mean squared NN distance, bidirectional = average of both directions; fscore: NN distance < delta (un-squared), percent"


class DegenerateInputError(ValueError):
    pass


@dataclass
class EvalReport:
    cd_bidirectional: float
    cd_a_to_b: float
    cd_b_to_a: float
    cd_bidirectional_unsquared: float
    cd_a_to_b_unsquared: float
    cd_b_to_a_unsquared: float
    fscore: float
    precision: float
    recall: float
    delta: float
    n_samples: int
    translation: list
    scale: float
    conventions: str = CONVENTIONS

    def to_dict(self) -> dict:
        return asdict(self)


def _as_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=np.float64).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("point set is empty")
    return pts


def nn_sq_dist(query: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Squared distance from every query point to its nearest reference point.

    The kd-tree only picks the neighbour; the distance is recomputed from
    coordinates so it matches a direct pairwise evaluation.
    """
    _, idx = cKDTree(ref).query(query, k=1)
    diff = query - ref[idx]
    return np.einsum("ij,ij->i", diff, diff)


def align(pred, gt) -> tuple[np.ndarray, dict]:
    """Translate ``pred`` onto ``gt``'s bounding-box center and match box diagonals.

    Rotation is not corrected.
    """
    pred, gt = _as_points(pred), _as_points(gt)
    plo, phi = pred.min(axis=0), pred.max(axis=0)
    glo, ghi = gt.min(axis=0), gt.max(axis=0)
    pdiag = np.linalg.norm(phi - plo)
    if pdiag == 0:
        raise DegenerateInputError("prediction has zero bounding-box diagonal")
    scale = float(np.linalg.norm(ghi - glo) / pdiag)
    pc, gc = (plo + phi) / 2, (glo + ghi) / 2
    aligned = (pred - pc) * scale + gc
    return aligned, {"translation": (gc - pc).tolist(), "scale": scale}


def chamfer(a, b) -> tuple[float, float, float]:
    """Return (bidirectional, a_to_b, b_to_a) using squared nearest-neighbour distances."""
    a, b = _as_points(a), _as_points(b)
    ab = float(nn_sq_dist(a, b).mean())
    ba = float(nn_sq_dist(b, a).mean())
    return (ab + ba) / 2, ab, ba


def fscore(pred, gt, delta: float = 0.02) -> tuple[float, float, float]:
    """Return (fscore, precision, recall) in percent for match threshold ``delta``."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    pred, gt = _as_points(pred), _as_points(gt)
    precision = 100.0 * np.count_nonzero(np.sqrt(nn_sq_dist(pred, gt)) < delta) / len(pred)
    recall = 100.0 * np.count_nonzero(np.sqrt(nn_sq_dist(gt, pred)) < delta) / len(gt)
    if precision + recall == 0:
        return 0.0, precision, recall
    return 2 * precision * recall / (precision + recall), precision, recall


def compare_points(pred, gt, delta: float = 0.02, do_align: bool = True) -> EvalReport:
    pred, gt = _as_points(pred), _as_points(gt)
    if do_align:
        pred, tf = align(pred, gt)
    else:
        tf = {"translation": [0.0, 0.0, 0.0], "scale": 1.0}
    d_ab, d_ba = nn_sq_dist(pred, gt), nn_sq_dist(gt, pred)
    ab, ba = float(d_ab.mean()), float(d_ba.mean())
    uab, uba = float(np.sqrt(d_ab).mean()), float(np.sqrt(d_ba).mean())
    f, p, r = fscore(pred, gt, delta)
    return EvalReport(
        cd_bidirectional=(ab + ba) / 2,
        cd_a_to_b=ab,
        cd_b_to_a=ba,
        cd_bidirectional_unsquared=(uab + uba) / 2,
        cd_a_to_b_unsquared=uab,
        cd_b_to_a_unsquared=uba,
        fscore=f,
        precision=p,
        recall=r,
        delta=delta,
        n_samples=len(gt),
        translation=tf["translation"],
        scale=tf["scale"],
    )


def evaluate(
    pred_mesh: TriMesh,
    gt_mesh: TriMesh,
    n: int = 4096,
    seed: int = 0,
    delta: float = 0.02,
    gt_seed: int | None = None,
) -> EvalReport:
    """Sample both normalized surfaces, align pred to gt and score.

    ``seed`` drives both samplers unless ``gt_seed`` is given.
    """
    gt = sample_surface(normalize(gt_mesh), n, seed if gt_seed is None else gt_seed).positions
    pred = sample_surface(normalize(pred_mesh), n, seed).positions
    return compare_points(pred, gt, delta)


def sketch_to_shape(sketch, mesh: TriMesh, n: int = 4096, seed: int = 0) -> float:
    """Asymmetric sketch-to-shape Chamfer (squared) in the normalized mesh frame.

    Sketch coordinates live in the unit cube; the normalized mesh is
    centered at the origin, so the sketch is shifted by -0.5.
    """
    surface = sample_surface(normalize(mesh), n, seed).positions
    pts = sketch.points() - 0.5
    return float(nn_sq_dist(pts, surface).mean())
