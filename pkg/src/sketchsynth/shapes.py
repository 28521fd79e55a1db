"""Small procedural meshes used for tests, demos and the acceptance suite."""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh

# box faces as quads over corner ids (bit 0 = x, bit 1 = y, bit 2 = z); winding fixed up below
_CUBE_QUADS = [
    (0, 2, 6, 4),  # x = lo
    (1, 5, 7, 3),  # x = hi
    (0, 4, 5, 1),  # y = lo
    (2, 3, 7, 6),  # y = hi
    (0, 1, 3, 2),  # z = lo
    (4, 6, 7, 5),  # z = hi
]


def _box_arrays(lo, hi):
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    verts = np.array(
        [[(hi if (i >> a) & 1 else lo)[a] for a in range(3)] for i in range(8)]
    )
    faces = []
    for a, b, c, d in _CUBE_QUADS:
        faces += [(a, b, c), (a, c, d)]
    faces = np.array(faces)
    tri = verts[faces]
    normal = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    inward = np.einsum("ij,ij->i", normal, tri.mean(axis=1) - (lo + hi) / 2) < 0
    faces[inward] = faces[inward][:, ::-1]
    return verts, faces


def box(lo=(0, 0, 0), hi=(1, 1, 1)) -> TriMesh:
    return TriMesh(*_box_arrays(lo, hi))


def cube(size: float = 1.0) -> TriMesh:
    """Axis-aligned cube with 8 vertices and 12 triangles centered at the origin."""
    h = size / 2
    return box((-h, -h, -h), (h, h, h))


def compose(boxes) -> TriMesh:
    """Concatenate independent boxes (no boolean union) into one mesh."""
    verts, faces = [], []
    for lo, hi in boxes:
        v, f = _box_arrays(lo, hi)
        faces.append(f + sum(len(x) for x in verts))
        verts.append(v)
    return TriMesh(np.concatenate(verts), np.concatenate(faces))


def table() -> TriMesh:
    """Tabletop on four legs: 5 boxes, y up."""
    legs = [
        ((x, 0.0, z), (x + 0.08, 0.7, z + 0.08))
        for x in (0.0, 1.12)
        for z in (0.0, 0.62)
    ]
    return compose([((-0.04, 0.7, -0.04), (1.24, 0.78, 0.74))] + legs)


def chair() -> TriMesh:
    """Seat, four legs, back panel and top rail: 7 boxes, y up."""
    legs = [
        ((x, 0.0, z), (x + 0.06, 0.45, z + 0.06))
        for x in (0.0, 0.44)
        for z in (0.0, 0.44)
    ]
    seat = ((-0.02, 0.45, -0.02), (0.52, 0.5, 0.52))
    back = ((0.0, 0.5, 0.44), (0.5, 0.9, 0.5))
    rail = ((-0.03, 0.9, 0.42), (0.53, 0.98, 0.52))
    return compose([seat] + legs + [back, rail])


def icosphere(subdivisions: int = 2) -> TriMesh:
    """Unit sphere approximation by repeated midpoint subdivision of an icosahedron."""
    t = (1 + 5**0.5) / 2
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(v, float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return TriMesh(np.array(verts), np.array(faces))


PROCEDURAL = {"cube": cube, "table": table, "chair": chair}
