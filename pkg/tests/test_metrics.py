import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import chamfer_bruteforce, match_counts_bruteforce
from sketchsynth import shapes
from sketchsynth.metrics import DegenerateInputError, align, chamfer, compare_points, evaluate, fscore


def test_identity_chamfer(rng):
    a = rng.random((50, 3))
    assert chamfer(a, a) == (0.0, 0.0, 0.0)


def test_single_pair():
    assert chamfer([[0, 0, 0]], [[0.5, 0, 0]]) == (0.25, 0.25, 0.25)


def test_matches_bruteforce_64(rng):
    for _ in range(20):
        a, b = rng.random((64, 3)), rng.random((64, 3))
        got, want = chamfer(a, b), chamfer_bruteforce(a, b)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


def test_empty_rejected():
    with pytest.raises(ValueError):
        chamfer(np.zeros((0, 3)), np.zeros((2, 3)))


def test_fscore_identity_and_disjoint(rng):
    a = rng.random((40, 3))
    assert fscore(a, a) == (100.0, 100.0, 100.0)
    assert fscore(a, a + 5.0) == (0.0, 0.0, 0.0)


def test_fscore_half_within():
    gt = np.array([[0, 0, 0], [1, 0, 0]], float)
    pred = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], float)
    f, p, r = fscore(pred, gt, 0.02)
    assert (p, r) == (50.0, 100.0)
    assert f == pytest.approx(200 / 3)


def test_fscore_delta_checked():
    with pytest.raises(ValueError):
        fscore([[0, 0, 0]], [[0, 0, 0]], 0)


def test_align_translation_and_scale(rng):
    gt = rng.random((30, 3))
    np.testing.assert_allclose(align(gt + [0.3, 0, 0], gt)[0], gt, atol=1e-9)
    np.testing.assert_allclose(align(gt * 2, gt)[0], gt, atol=1e-9)


def test_align_does_not_undo_rotation(rng):
    gt = rng.random((30, 3))
    rot = gt @ np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], float).T
    assert not np.allclose(align(rot, gt)[0], gt, atol=1e-6)


def test_align_idempotent(rng):
    gt, pred = rng.random((30, 3)), rng.random((25, 3)) * 3 + 1
    once = align(pred, gt)[0]
    np.testing.assert_allclose(align(once, gt)[0], once, atol=1e-12)


def test_align_degenerate():
    with pytest.raises(DegenerateInputError):
        align(np.ones((5, 3)), np.random.default_rng(0).random((5, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 60), st.integers(1, 60))
def test_direction_symmetry_and_oracle_counts(seed, n, m):
    rng = np.random.default_rng(seed)
    a, b = rng.random((n, 3)) * 0.2, rng.random((m, 3)) * 0.2
    assert chamfer(a, b)[1] == chamfer(b, a)[2]
    p_hits, r_hits = match_counts_bruteforce(a, b, 0.05)
    _, p, r = fscore(a, b, 0.05)
    assert p == 100.0 * p_hits / n and r == 100.0 * r_hits / m


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.001, 0.5), st.floats(0.001, 0.5))
def test_fscore_monotone_in_delta(seed, d1, d2):
    rng = np.random.default_rng(seed)
    a, b = rng.random((40, 3)), rng.random((40, 3))
    lo, hi = sorted((d1, d2))
    assert fscore(a, b, lo)[0] <= fscore(a, b, hi)[0]


def test_evaluate_identity_same_seed():
    rep = evaluate(shapes.cube(), shapes.cube(), seed=4)
    assert rep.cd_bidirectional == 0.0 and rep.fscore == 100.0
    assert rep.n_samples == 4096 and rep.scale == pytest.approx(1.0)
    assert "squared" in rep.to_dict()["conventions"]


def test_compare_points_reports_both_conventions(rng):
    a, b = rng.random((20, 3)), rng.random((20, 3))
    rep = compare_points(a, b, do_align=False)
    assert rep.cd_a_to_b == pytest.approx(chamfer(a, b)[1])
    assert rep.cd_a_to_b_unsquared >= 0 and rep.cd_a_to_b_unsquared ** 2 <= rep.cd_a_to_b + 1e-15
