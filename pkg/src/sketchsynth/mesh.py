"""Triangle mesh loading, normalization and area-weighted surface sampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

DEGENERATE_AREA = 1e-12
FORMATS = ("obj", "off", "ply")


class MeshError(ValueError):
    """Raised when a mesh file is malformed or violates the mesh invariants."""


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Indexed triangle mesh.

    ``vertices`` is (V, 3) float64 and ``faces`` is (F, 3) int64.
    Face normals and areas are derived lazily.
    """

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.ascontiguousarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(v) == 0 or len(f) == 0:
            raise MeshError("empty mesh")
        if f.min() < 0 or f.max() >= len(v):
            raise MeshError(
                f"face index out of range: valid 0..{len(v) - 1}, found {f.min()}..{f.max()}"
            )
        v.flags.writeable = False
        f.flags.writeable = False
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def triangles(self) -> np.ndarray:
        return self.vertices[self.faces]

    @cached_property
    def _cross(self) -> np.ndarray:
        tri = self.triangles
        return np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])

    @cached_property
    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self._cross, axis=1)

    @cached_property
    def face_normals(self) -> np.ndarray:
        norm = np.linalg.norm(self._cross, axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            n = self._cross / norm
        return np.where(norm > 0, n, 0.0)

    @property
    def bounds(self) -> np.ndarray:
        return np.stack([self.vertices.min(axis=0), self.vertices.max(axis=0)])

    def __eq__(self, other):
        if not isinstance(other, TriMesh):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices) and np.array_equal(
            self.faces, other.faces
        )

    def __repr__(self):
        return f"TriMesh(n_vertices={self.n_vertices}, n_faces={self.n_faces})"


@dataclass(frozen=True, eq=False)
class SurfaceSamples:
    """Points on a mesh surface with the flat normal and index of the face they came from."""

    positions: np.ndarray
    normals: np.ndarray
    face_ids: np.ndarray

    def __len__(self):
        return len(self.positions)


def _parse_obj(text: str):
    verts, faces = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
                if len(verts[-1]) != 3:
                    raise ValueError("vertex needs 3 coordinates")
            elif parts[0] == "f":
                idx = []
                for tok in parts[1:]:
                    i = int(tok.split("/")[0])
                    # OBJ indices are 1-based; negatives count back from the end
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) < 3:
                    raise ValueError("face needs at least 3 vertices")
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
        except ValueError as exc:
            raise MeshError(f"OBJ line {lineno}: {exc}") from exc
    return verts, faces


def _data_lines(text: str):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def _parse_off(text: str):
    lines = _data_lines(text)
    try:
        header = next(lines)
        if not header.startswith("OFF"):
            raise MeshError("missing OFF header")
        rest = header[3:].split()
        counts = rest if rest else next(lines).split()
        nv, nf = int(counts[0]), int(counts[1])
        verts = [[float(x) for x in next(lines).split()[:3]] for _ in range(nv)]
        faces = []
        for _ in range(nf):
            vals = [int(x) for x in next(lines).split()]
            k, idx = vals[0], vals[1 : 1 + vals[0]]
            if len(idx) != k or k < 3:
                raise MeshError("malformed OFF face record")
            faces.extend([idx[0], idx[j], idx[j + 1]] for j in range(1, k - 1))
    except StopIteration:
        raise MeshError("truncated OFF file") from None
    except (ValueError, IndexError) as exc:
        raise MeshError(f"malformed OFF file: {exc}") from exc
    return verts, faces


def _parse_ply(text: str):
    lines = iter(text.splitlines())
    try:
        if next(lines).strip() != "ply":
            raise MeshError("missing ply magic")
        elements = []
        for line in lines:
            parts = line.split()
            if not parts or parts[0] in ("comment", "obj_info"):
                continue
            if parts[0] == "format":
                if parts[1] != "ascii":
                    raise MeshError("only ASCII PLY is supported")
            elif parts[0] == "element":
                elements.append((parts[1], int(parts[2]), []))
            elif parts[0] == "property":
                elements[-1][2].append(parts[1:])
            elif parts[0] == "end_header":
                break
        body = (ln for ln in lines if ln.strip())
        verts, faces = [], []
        for name, count, props in elements:
            for _ in range(count):
                vals = next(body).split()
                if name == "vertex":
                    names = [p[-1] for p in props]
                    verts.append([float(vals[names.index(c)]) for c in "xyz"])
                elif name == "face":
                    k = int(vals[0])
                    idx = [int(x) for x in vals[1 : 1 + k]]
                    if len(idx) != k or k < 3:
                        raise MeshError("malformed PLY face record")
                    faces.extend([idx[0], idx[j], idx[j + 1]] for j in range(1, k - 1))
    except StopIteration:
        raise MeshError("truncated PLY file") from None
    except (ValueError, IndexError) as exc:
        raise MeshError(f"malformed PLY file: {exc}") from exc
    return verts, faces


_PARSERS = {"obj": _parse_obj, "off": _parse_off, "ply": _parse_ply}


def detect_format(path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix not in _PARSERS:
        raise MeshError(f"cannot infer mesh format from {path!s}")
    return suffix


def load_mesh(path, format: str = "auto") -> TriMesh:
    """Read an OBJ, OFF or ASCII PLY file into an un-normalized TriMesh.

    Polygonal faces are fan-triangulated. Raises MeshError on parse failure,
    empty meshes and out-of-range face indices.
    """
    fmt = detect_format(path) if format == "auto" else format.lower()
    if fmt not in _PARSERS:
        raise MeshError(f"unsupported format {format!r}")
    text = Path(path).read_text()
    verts, faces = _PARSERS[fmt](text)
    if not verts or not faces:
        raise MeshError(f"empty mesh: {path!s}")
    mesh = TriMesh(np.array(verts, dtype=np.float64), np.array(faces, dtype=np.int64))
    log.debug("loaded %s: %d vertices, %d faces", path, mesh.n_vertices, mesh.n_faces)
    return mesh


def save_obj(mesh: TriMesh, path) -> None:
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def normalize(mesh: TriMesh) -> TriMesh:
    """Center the bounding box at the origin and scale its longest side to 1.

    Faces whose area falls below 1e-12 after scaling are dropped.
    """
    lo, hi = mesh.bounds
    extent = float((hi - lo).max())
    if extent <= 0:
        raise MeshError("zero-extent mesh: all vertices coincide")
    center = (lo + hi) / 2
    if abs(extent - 1.0) <= 1e-12 and np.abs(center).max() <= 1e-12:
        # already normalized up to rounding; rescaling again would only add noise
        verts = mesh.vertices
    else:
        verts = (mesh.vertices - center) / extent
    out = TriMesh(verts, mesh.faces)
    keep = out.face_areas > DEGENERATE_AREA
    if not keep.all():
        log.warning("dropping %d degenerate faces", int((~keep).sum()))
        out = TriMesh(verts, mesh.faces[keep])
    return out


def sample_surface(mesh: TriMesh, n: int, seed: int | None = 0) -> SurfaceSamples:
    """Draw ``n`` points uniformly over the surface area.

    Faces are picked by inverting the cumulative area; barycentric
    coordinates use the reflection trick, so each sample lies exactly on
    its face. Same seed gives bit-identical output.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(mesh.face_areas)
    r = rng.random(n) * cum[-1]
    face_ids = np.minimum(np.searchsorted(cum, r, side="right"), mesh.n_faces - 1)
    uv = rng.random((n, 2))
    flip = uv.sum(axis=1) > 1
    uv[flip] = 1 - uv[flip]
    tri = mesh.triangles[face_ids]
    pos = tri[:, 0] + uv[:, :1] * (tri[:, 1] - tri[:, 0]) + uv[:, 1:] * (tri[:, 2] - tri[:, 0])
    return SurfaceSamples(pos, mesh.face_normals[face_ids], face_ids)
