"""Acceptance gate. Each test checks one criterion at its stated tolerance and
records a PASS/FAIL line, shown in the "acceptance criteria" summary section.

Run with ``pytest tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest
from scipy.stats import ks_2samp

from conftest import random_sketch
from oracles import chamfer_bruteforce, cube_edges, distance_to_skeleton, match_counts_bruteforce
from sketchsynth import shapes
from sketchsynth.dataset import DatasetManifest, ManifestEntry, generate_dataset
from sketchsynth.embedding import embed, phi_sequence, phi_spatial, reference_config
from sketchsynth.mesh import normalize, save_obj
from sketchsynth.metrics import chamfer, evaluate, fscore, sketch_to_shape
from sketchsynth.ordering import build_graph, order_strokes, traverse
from sketchsynth.pipeline import PipelineParams, run_pipeline
from sketchsynth.saliency import detect_sharp_edges, sample_salient
from sketchsynth.sketch import Sketch, Stroke, from_json, to_json, truncate
from sketchsynth.stroke_post import cull_collinear, merge_strokes
from sketchsynth.tokenizer import EOS, MASK, SEP, build_completion_input, detokenize, draw_augmentation, tokenize

MESHES = {"cube": shapes.cube, "table": shapes.table, "chair": shapes.chair}


def test_criterion_01_sketch_fidelity(record_criterion):
    t0 = time.perf_counter()
    cds = {name: 1000 * sketch_to_shape(run_pipeline(make(), seed=0, mesh_id=name).sketch, make())
           for name, make in MESHES.items()}
    elapsed = time.perf_counter() - t0
    ok = all(v <= 5.5 for v in cds.values()) and elapsed < 5
    detail = ", ".join(f"{k} {v:.3f}" for k, v in cds.items())
    assert record_criterion(1, ok, f"sketch->shape CD x1000 <= 5.5: {detail}; {elapsed:.2f}s < 5s")


def test_criterion_02_throughput(tmp_path, record_criterion):
    entries = []
    for name, make in MESHES.items():
        save_obj(make(), tmp_path / f"{name}.obj")
        entries.append(ManifestEntry(f"{name}.obj", f"{name}.json", name, "synthetic-train"))
    report = generate_dataset(DatasetManifest(entries, root=tmp_path), PipelineParams(samples=2048), seed=0)
    worst = report.summary()["max_seconds"]
    ok = report.generated == 3 and worst <= 2.0
    assert record_criterion(2, ok, f"max {worst:.3f}s per mesh <= 2s at 2048 samples ({report.generated}/3 generated)")


def test_criterion_03_metric_oracle(record_criterion):
    rng = np.random.default_rng(3)
    worst, count_mismatch = 0.0, 0
    for _ in range(100):
        a = rng.random((int(rng.integers(1, 257)), 3))
        b = rng.random((int(rng.integers(1, 257)), 3))
        worst = max(worst, np.max(np.abs(np.subtract(chamfer(a, b), chamfer_bruteforce(a, b)))))
        p_hits, r_hits = match_counts_bruteforce(a, b, 0.02)
        _, p, r = fscore(a, b, 0.02)
        count_mismatch += (round(p * len(a) / 100) != p_hits) + (round(r * len(b) / 100) != r_hits)
    ok = worst <= 1e-12 and count_mismatch == 0
    assert record_criterion(3, ok, f"100 pairs: max |CD - brute| = {worst:.1e} <= 1e-12, count mismatches = {count_mismatch}")


def test_criterion_04_identity_metrics(record_criterion):
    cube = shapes.cube()
    same = evaluate(cube, cube, n=4096, seed=11)
    diff = evaluate(cube, cube, n=4096, seed=11, gt_seed=12)
    cd_diff = 1000 * diff.cd_bidirectional
    ok = (same.cd_bidirectional == 0.0 and same.fscore == 100.0 and cd_diff < 0.5 and diff.fscore > 99)
    detail = (f"same seed CD {same.cd_bidirectional} F {same.fscore}; "
              f"different seeds CD x1000 {cd_diff:.3f} (< 0.5), F {diff.fscore:.2f} (> 99)")
    # The F-score bound is not reachable at N=4096 on a cube of area 6 with
    # delta=0.02; the analysis lives in the decisions ledger. Left failing on purpose.
    assert record_criterion(4, ok, detail)


def test_criterion_05_geometry_invariants(record_criterion):
    cube = normalize(shapes.cube())
    cloud = sample_salient(cube, detect_sharp_edges(cube, 15.0), spacing=0.02)
    edge_err = float(distance_to_skeleton(cloud.points, cube_edges()).max())

    rng = np.random.default_rng(5)
    cull_ok = True
    for _ in range(200):
        a, d = rng.random(3), rng.standard_normal(3)
        pts = a + np.sort(rng.random(int(rng.integers(3, 20))))[:, None] * d
        out = cull_collinear(Stroke(pts), 0.04).points
        cull_ok &= len(out) == 2 and np.array_equal(out, pts[[0, -1]])

    strokes = run_pipeline(shapes.chair(), seed=0).sketch.strokes
    once = merge_strokes(strokes, 0.02)
    twice = merge_strokes(once, 0.02)
    fix_ok = len(once) == len(twice) and all(np.array_equal(x.points, y.points) for x, y in zip(once, twice))

    def key(ss):
        return sorted(sorted(map(tuple, s.points.tolist())) for s in ss)

    base = [Stroke(rng.random((int(rng.integers(2, 6)), 3))) for _ in range(15)]
    graph = build_graph(base, 3)
    perm_ok = all(key(order_strokes(graph, base, 0.1, seed).strokes) == key(base) for seed in range(1000))

    ok = edge_err <= 1e-9 and cull_ok and fix_ok and perm_ok
    assert record_criterion(5, ok, f"salient-to-edge max {edge_err:.1e} <= 1e-9; cull endpoints {cull_ok}; "
                                   f"merge fixpoint {fix_ok}; permutation over 1000 seeds {perm_ok}")


@pytest.mark.slow
def test_criterion_06_stochasticity(record_criterion):
    ang = np.linspace(0, 2 * np.pi, 10, endpoint=False)
    star = [Stroke(np.array([[0.5 + 0.05 * np.cos(a), 0.5 + 0.05 * np.sin(a), 0.5],
                             [0.5 + 0.4 * np.cos(a), 0.5 + 0.4 * np.sin(a), 0.5]])) for a in ang]
    graph = build_graph(star, 3)
    skipped = total = 0
    for seed in range(100_000):
        for _, taken in traverse(graph, star, 0.1, np.random.default_rng(seed)).decisions:
            skipped += not taken
            total += 1
    skip = skipped / total

    lengths = [5 + (k % 7) for k in range(20)]
    owner = np.repeat(np.arange(20), lengths)
    rng = np.random.default_rng(6)
    sd = pd = pe = sw = 0
    for _ in range(100_000):
        plan = draw_augmentation(lengths, {"stroke_drop": 0.15, "point_drop": 0.30, "stroke_swap": 0.20}, rng)
        alive = ~plan.dropped_strokes[owner]
        sd += plan.dropped_strokes.sum()
        pd += plan.dropped_points[alive].sum()
        pe += alive.sum()
        sw += plan.swap_selected.sum()
    rates = (sd / 2e6, pd / pe, sw / 2e6)
    ok = abs(skip - 0.10) <= 0.01 and all(abs(r - t) <= 0.01 for r, t in zip(rates, (0.15, 0.30, 0.20)))
    assert record_criterion(6, ok, f"skip {skip:.4f} (0.10 +- 0.01); masking {rates[0]:.4f}/{rates[1]:.4f}/{rates[2]:.4f} "
                                   f"(0.15/0.30/0.20 +- 0.01)")


def test_criterion_07_embedding_kernels(record_criterion):
    err = max(
        np.abs(phi_spatial(0.0, 3) - [0, 1, 0, 1, 0, 1]).max(),
        np.abs(phi_spatial(0.5, 2) - [1, 0, 0, -1]).max(),
        np.abs(phi_spatial(1.0, 1) - [0, -1]).max(),
        np.abs(phi_sequence(0, 256) - np.tile([0, 1], 128)).max(),
        np.abs(phi_sequence(1, 4)[:2] - [np.sin(1), np.cos(1)]).max(),
    )
    cfg = reference_config()
    rng = np.random.default_rng(7)
    strokes = [Stroke(rng.random((n, 3))) for n in (4, 6, 3)]
    m = embed(tokenize(Sketch(strokes)), cfg)
    swapped = embed(tokenize(Sketch([strokes[1], strokes[0], strokes[2]])), cfg)
    shape_ok = m.shape == (13 + 3 + 1, 256)
    sensitive = not np.allclose(m, swapped)
    ok = err <= 1e-12 and shape_ok and sensitive
    assert record_criterion(7, ok, f"trig max err {err:.1e} <= 1e-12; shape {m.shape}; swap changes matrix {sensitive}")


def test_criterion_08_round_trips(record_criterion):
    rng = np.random.default_rng(8)
    sk = run_pipeline(shapes.table(), seed=4).sketch
    text = to_json(sk)
    fix_ok = to_json(from_json(text)) == text and from_json(text) == sk
    bij_ok = all(detokenize(tokenize(s)) == s for s in (random_sketch(rng) for _ in range(1000)))
    det_ok = to_json(run_pipeline(shapes.chair(), seed=9).sketch) == to_json(run_pipeline(shapes.chair(), seed=9).sketch)
    ok = fix_ok and bij_ok and det_ok
    assert record_criterion(8, ok, f"save/load fixpoint {fix_ok}; bijection on 1000 sketches {bij_ok}; "
                                   f"pipeline byte-identical {det_ok}")


def test_criterion_09_completion(record_criterion):
    rng = np.random.default_rng(9)
    prefix_ok = True
    for _ in range(200):
        sk = random_sketch(rng)
        f = float(rng.uniform(0.05, 1.0))
        out = truncate(sk, f)
        prefix_ok &= all(np.array_equal(a.points, b.points[: len(a)]) for a, b in zip(out.strokes, sk.strokes))
        prefix_ok &= out.n_points <= max(2, int(np.ceil(f * sk.n_points)))

    lengths = rng.integers(2, 15, size=30)
    seq = tokenize(Sketch([Stroke(rng.random((n, 3))) for n in lengths]))
    kept = int(np.ceil(0.5 * (len(seq) - 1)))
    pad_ok, kept_lengths, intervals = True, [], []
    for trial in range(1000):
        out = build_completion_input(seq, 0.5, seed=trial)
        tail = out.kind[kept:]
        pad_ok &= len(tail) == 101 and tail[-1] == EOS and (out.kind == EOS).sum() == 1
        pad_ok &= bool(np.isin(tail[:-1], [MASK, SEP]).all())
        kept_lengths += [len(b) - 1 for b in out.take(slice(0, kept)).blocks()]
        intervals += list(np.diff(np.flatnonzero(tail == SEP)) - 1)
    ks = ks_2samp(intervals, kept_lengths).statistic
    ok = prefix_ok and pad_ok and ks < 0.2
    assert record_criterion(9, ok, f"truncate prefixes {prefix_ok}; pad to kept+100 with one EOS {pad_ok}; KS {ks:.3f} < 0.2")


@pytest.mark.skip(reason="needs the trained diffusion model and the real dataset")
def test_criterion_10_not_reproducible():
    """Generation quality, few-shot and completion curves are out of reach here;
    criteria 1-9 stand in for them."""
