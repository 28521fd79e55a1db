import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from sketchsynth import shapes
from sketchsynth.mesh import MeshError, TriMesh, load_mesh, normalize, sample_surface, save_obj


def test_load_obj_cube(cube_obj):
    m = load_mesh(cube_obj)
    assert (m.n_vertices, m.n_faces) == (8, 12)


def test_load_rejects_out_of_range_index(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("\n".join(f"v {i} {i % 2} {i % 3}" for i in range(8)) + "\nf 1 2 10\n")
    with pytest.raises(MeshError, match="out of range"):
        load_mesh(p)


def test_load_rejects_empty_file(tmp_path):
    p = tmp_path / "empty.obj"
    p.write_text("")
    with pytest.raises(MeshError, match="empty"):
        load_mesh(p)


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.obj"
    p.write_text("v 0 0 zero\n")
    with pytest.raises(MeshError):
        load_mesh(p)


def test_obj_polygons_are_fan_triangulated(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3 4/4/4\n")
    m = load_mesh(p)
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]


def test_obj_negative_indices(tmp_path):
    p = tmp_path / "neg.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
    assert load_mesh(p).faces.tolist() == [[0, 1, 2]]


def test_off_and_ply_match_obj(tmp_path):
    cube = shapes.cube()
    v, f = cube.vertices, cube.faces
    off = tmp_path / "c.off"
    off.write_text(
        f"OFF\n{len(v)} {len(f)} 0\n"
        + "".join(f"{a} {b} {c}\n" for a, b, c in v)
        + "".join(f"3 {a} {b} {c}\n" for a, b, c in f)
    )
    ply = tmp_path / "c.ply"
    ply.write_text(
        "ply\nformat ascii 1.0\ncomment test\n"
        f"element vertex {len(v)}\nproperty float x\nproperty float y\nproperty float z\n"
        f"element face {len(f)}\nproperty list uchar int vertex_indices\nend_header\n"
        + "".join(f"{a} {b} {c}\n" for a, b, c in v)
        + "".join(f"3 {a} {b} {c}\n" for a, b, c in f)
    )
    obj = tmp_path / "c.obj"
    save_obj(cube, obj)
    assert load_mesh(off) == cube
    assert load_mesh(ply) == cube
    assert load_mesh(obj) == cube


def test_binary_ply_rejected(tmp_path):
    p = tmp_path / "b.ply"
    p.write_text("ply\nformat binary_little_endian 1.0\nend_header\n")
    with pytest.raises(MeshError, match="ASCII"):
        load_mesh(p)


def test_normalize_cube_corners():
    m = normalize(shapes.box((0, 0, 0), (2, 2, 2)))
    np.testing.assert_array_equal(m.bounds, [[-0.5] * 3, [0.5] * 3])


def test_normalize_keeps_aspect():
    m = normalize(shapes.box((0, 0, 0), (4, 2, 1)))
    np.testing.assert_allclose(m.bounds[1] - m.bounds[0], [1, 0.5, 0.25])


def test_normalize_zero_extent():
    with pytest.raises(MeshError, match="zero-extent"):
        normalize(TriMesh(np.ones((3, 3)), [[0, 1, 2]]))


def test_normalize_drops_degenerate_faces():
    m = TriMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0]], [[0, 1, 2], [0, 1, 3]])
    assert normalize(m).n_faces == 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_normalize_idempotent(seed):
    rng = np.random.default_rng(seed)
    verts = rng.normal(size=(9, 3)) * rng.uniform(0.1, 10) + rng.normal(size=3)
    once = normalize(TriMesh(verts, np.arange(9).reshape(3, 3)))
    assert normalize(once) == once


def test_samples_on_cube_surface(unit_cube):
    s = sample_surface(unit_cube, 2048, seed=7)
    assert len(s) == 2048
    np.testing.assert_allclose(np.abs(s.positions).max(axis=1), 0.5, atol=1e-9)


def test_samples_lie_on_their_face(unit_cube):
    s = sample_surface(unit_cube, 500, seed=1)
    tri = unit_cube.triangles[s.face_ids]
    # barycentric coordinates from a least-squares solve against the face's edge vectors
    e1, e2 = tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]
    A = np.stack([e1, e2], axis=2)
    uv = np.linalg.lstsq(A[0], (s.positions[0] - tri[0, 0]), rcond=None)[0]
    for k in range(len(s)):
        uv = np.linalg.lstsq(A[k], s.positions[k] - tri[k, 0], rcond=None)[0]
        bary = np.array([1 - uv.sum(), uv[0], uv[1]])
        assert bary.min() >= -1e-9 and abs(bary.sum() - 1) < 1e-9
        np.testing.assert_allclose(tri[k, 0] + A[k] @ uv, s.positions[k], atol=1e-9)
    np.testing.assert_array_equal(s.normals, unit_cube.face_normals[s.face_ids])


def test_sampling_deterministic(unit_cube):
    a, b = sample_surface(unit_cube, 300, seed=99), sample_surface(unit_cube, 300, seed=99)
    assert a.positions.tobytes() == b.positions.tobytes()
    assert a.face_ids.tobytes() == b.face_ids.tobytes()


def test_area_weighted_face_counts():
    # two triangles with areas 3 : 1
    m = TriMesh([[0, 0, 0], [3, 0, 0], [0, 2, 0], [0, 0, 1], [1, 0, 1], [0, 2, 1]], [[0, 1, 2], [3, 4, 5]])
    s = sample_surface(m, 100_000, seed=3)
    counts = np.bincount(s.face_ids, minlength=2)
    assert abs(counts[0] - 75_000) <= 750 and abs(counts[1] - 25_000) <= 750
    assert stats.chisquare(counts, [75_000, 25_000]).pvalue > 0.01


def test_area_weighted_chi_square_many_faces():
    m = normalize(shapes.chair())
    s = sample_surface(m, 200_000, seed=11)
    expected = m.face_areas / m.face_areas.sum() * len(s)
    counts = np.bincount(s.face_ids, minlength=m.n_faces)
    assert stats.chisquare(counts, expected).pvalue > 0.01
