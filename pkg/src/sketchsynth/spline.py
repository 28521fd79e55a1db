"""Greedy chaining of salient points and least-squares quadratic Bezier fitting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from .saliency import SalientCloud

DUPLICATE_EPS = 1e-9
# slack on radius comparisons so points placed exactly at the link radius still link
RADIUS_SLACK = 1e-9


@dataclass
class PolyChain:
    points: np.ndarray
    closed: bool = False
    id: int = 0

    def __len__(self):
        return len(self.points)


@dataclass
class BezierStroke:
    """A fitted stroke.

    ``control`` holds the three control points, or is None when the piece
    was too short to fit and keeps its raw polyline in ``samples``.
    ``params`` are the curve parameters the fit converged to, one per
    input point.
    """

    control: np.ndarray | None
    samples: np.ndarray
    source_chain: int
    params: np.ndarray | None = None
    rms: float = 0.0


def _turn_cos(prev_dir: np.ndarray, cand: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(cand, axis=1) * np.linalg.norm(prev_dir)
    return cand @ prev_dir / n


def chain_points(
    cloud: SalientCloud | np.ndarray, link_radius: float = 0.02, max_turn_deg: float = 60.0
) -> list[PolyChain]:
    """Group salient points into ordered chains by greedy nearest-neighbour growth.

    A chain is seeded at the lowest-index free point and grown at both
    ends. Each step takes the nearest free point within ``link_radius``
    whose turn against the current direction stays below ``max_turn_deg``.
    Points within 1e-9 of an accepted point are absorbed. Groups of a
    single point are discarded.
    """
    if link_radius <= 0:
        raise ValueError("link_radius must be positive")
    pts = np.asarray(getattr(cloud, "points", cloud), dtype=np.float64)
    if len(pts) == 0:
        return []
    tree = cKDTree(pts)
    free = np.ones(len(pts), dtype=bool)
    cos_limit = np.cos(np.radians(max_turn_deg))
    radius = link_radius * (1 + RADIUS_SLACK)

    def take(i):
        free[i] = False
        for j in tree.query_ball_point(pts[i], DUPLICATE_EPS):
            free[j] = False

    def grow(chain):
        while True:
            tip = pts[chain[-1]]
            cand = [j for j in tree.query_ball_point(tip, radius) if free[j]]
            if not cand:
                return
            cand = np.array(sorted(cand))
            d = np.linalg.norm(pts[cand] - tip, axis=1)
            if len(chain) >= 2:
                ok = _turn_cos(tip - pts[chain[-2]], pts[cand] - tip) > cos_limit
                cand, d = cand[ok], d[ok]
                if len(cand) == 0:
                    return
            nxt = int(cand[np.argmin(d)])
            chain.append(nxt)
            take(nxt)

    chains = []
    for seed in range(len(pts)):
        if not free[seed]:
            continue
        take(seed)
        fwd = [seed]
        grow(fwd)
        if len(fwd) >= 2:
            bwd = [fwd[1], seed]
        else:
            bwd = [seed]
        grow(bwd)
        idx = bwd[:1:-1] + fwd if len(fwd) >= 2 else bwd[::-1]
        if len(idx) < 2:
            continue
        chain_pts = pts[idx]
        closed = len(idx) > 2 and np.linalg.norm(chain_pts[0] - chain_pts[-1]) <= radius
        chains.append(PolyChain(chain_pts, closed=bool(closed), id=len(chains)))
    return chains


def chord_params(points: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    t = np.concatenate([[0.0], np.cumsum(seg)])
    return t / t[-1] if t[-1] > 0 else np.linspace(0, 1, len(points))


def bezier_eval(control: np.ndarray, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)[:, None]
    s = 1 - t
    return s * s * control[0] + 2 * s * t * control[1] + t * t * control[2]


def _solve_middle(points, t, p0, p2):
    b = 2 * t * (1 - t)
    denom = b @ b
    if denom == 0:
        return (p0 + p2) / 2
    rest = points - ((1 - t) ** 2)[:, None] * p0 - (t**2)[:, None] * p2
    return b @ rest / denom


def _joint_refine(points, t, p1, p0, p2):
    """Least squares over the middle control point and the interior parameters together.

    Parameters are written as normalized cumulative sums of exp(u), so they
    stay strictly increasing. Without that, hairpin-shaped chains settle in
    minima where neighbouring parameters cross.
    """
    n = len(points)
    inner = slice(1, n - 1)
    steps = np.arange(1, n - 1)[:, None] > np.arange(n - 1)[None, :]

    def unpack(x):
        w = np.exp(x[3:])
        c = np.concatenate([[0.0], np.cumsum(w)])
        return np.stack([p0, x[:3], p2]), c / c[-1], w

    def fun(x):
        control, tt, _ = unpack(x)
        return (bezier_eval(control, tt) - points)[inner].ravel()

    def jac(x):
        control, tt, w = unpack(x)
        ti = tt[inner]
        m = len(ti)
        J = np.empty((3 * m, 3 + n - 1))
        b = 2 * ti * (1 - ti)
        deriv = 2 * ((1 - ti)[:, None] * (control[1] - control[0]) + ti[:, None] * (control[2] - control[1]))
        # d t_i / d u_j = w_j ([j < i] - t_i) / sum(w)
        dt = w[None, :] * (steps - ti[:, None]) / w.sum()
        for k in range(3):
            J[k::3, :3] = 0.0
            J[k::3, k] = b
            J[k::3, 3:] = deriv[:, k : k + 1] * dt
        return J

    # P1 = 2 B(1/2) - (P0 + P2) / 2, so for any curve that stays near the
    # points it sits within a couple of extents of their box. Bounding it
    # keeps noisy chains from drifting to infinity with t collapsing to {0, 1}.
    lo_pt, hi_pt = points.min(axis=0), points.max(axis=0)
    reach = 2 * np.linalg.norm(hi_pt - lo_pt) + 1e-9
    u0 = np.clip(np.log(np.maximum(np.diff(t), 1e-9)), -30.0, 0.0)
    x0 = np.concatenate([np.clip(p1, lo_pt - reach, hi_pt + reach), u0])
    lo = np.concatenate([lo_pt - reach, np.full(n - 1, -30.0)])
    hi = np.concatenate([hi_pt + reach, np.zeros(n - 1)])
    res = least_squares(fun, x0, jac=jac, bounds=(lo, hi), method="trf",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
    return unpack(res.x)[1]


def fit_bezier_points(points: np.ndarray):
    """Fit a quadratic Bezier with fixed endpoints to ordered points.

    Parameters start at normalized chord length and are then refined
    jointly with the middle control point, so points sampled from any
    quadratic are reproduced exactly. The middle control point returned is
    the closed-form least-squares optimum for the final parameters.
    Returns (control, params).
    """
    points = np.asarray(points, dtype=np.float64)
    p0, p2 = points[0], points[-1]
    t = chord_params(points)
    p1 = _solve_middle(points, t, p0, p2)
    if len(points) > 2:
        t = _joint_refine(points, t, p1, p0, p2)
        p1 = _solve_middle(points, t, p0, p2)
    return np.stack([p0, p1, p2]), t


def residuals(stroke: BezierStroke, points: np.ndarray) -> np.ndarray:
    """Per-point distance between the input points and the curve at the fitted parameters."""
    return np.linalg.norm(bezier_eval(stroke.control, stroke.params) - points, axis=1)


def fit_quadratic(chain: PolyChain, min_len: int = 12) -> BezierStroke | None:
    """Fit one quadratic Bezier to a chain; None when the chain is shorter than ``min_len``."""
    pts = np.asarray(chain.points, dtype=np.float64)
    if len(pts) < min_len:
        return None
    control, t = fit_bezier_points(pts)
    samples = bezier_eval(control, np.linspace(0, 1, len(pts)))
    samples[0], samples[-1] = control[0], control[2]
    rms = float(np.sqrt(np.mean(np.sum((bezier_eval(control, t) - pts) ** 2, axis=1))))
    return BezierStroke(control, samples, chain.id, params=t, rms=rms)


def _fit_recursive(pts, chain_id, min_len, rms_max, out):
    fitted = fit_quadratic(PolyChain(pts, id=chain_id), min_len)
    if fitted is None:
        out.append(BezierStroke(None, pts.copy(), chain_id))
        return
    if fitted.rms <= rms_max or len(pts) < 3:
        out.append(fitted)
        return
    dev = residuals(fitted, pts)
    k = int(np.argmax(dev[1:-1])) + 1
    _fit_recursive(pts[: k + 1], chain_id, min_len, rms_max, out)
    _fit_recursive(pts[k:], chain_id, min_len, rms_max, out)


def fit_all(
    chains: list[PolyChain], min_len: int = 12, rms_max: float = 0.01
) -> tuple[list[BezierStroke], list[PolyChain]]:
    """Fit every chain of at least ``min_len`` points; shorter chains are returned as rejects.

    A fit whose RMS residual exceeds ``rms_max`` is split at its point of
    largest deviation and both halves are refitted. Halves that drop below
    ``min_len`` keep their raw polyline.
    """
    if min_len < 3:
        raise ValueError("min_len must be >= 3")
    strokes, rejects = [], []
    for chain in sorted(chains, key=lambda c: c.id):
        if len(chain) < min_len:
            rejects.append(chain)
            continue
        _fit_recursive(np.asarray(chain.points, dtype=np.float64), chain.id, min_len, rms_max, strokes)
    return strokes, rejects
