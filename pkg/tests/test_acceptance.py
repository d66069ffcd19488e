"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Set ``HOVW_MPEG7`` to an MPEG-7 CE-1 folder (``class-N.gif`` files) to run the
dataset reproduction check; it is skipped otherwise.
"""

import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from helpers import (brute_average_precision, brute_force_ted, brute_precision_at_recall,
                     canonical_trees, circle_square_cloud, disk, mapping_matrix, record, record_skip,
                     square, tai_mappings, word_distance_oracle)
from hovw.decompose import HOLE, OBJECT, decompose
from hovw.descriptors import bending_energy, circularity, convexity, describe_shape, eccentricity
from hovw.experiment import cross_validate
from hovw.metrics import (average_precision, bucket_precision_recall, f1_score,
                          precision_recall_curve)
from hovw.pipeline import analyze_dataset, train_model
from hovw.preprocess import binarize_pipeline, otsu_threshold
from hovw.retrieval import query, query_analysis
from hovw.synth import generate_synthetic_corpus, random_shape, render_shape
from hovw.tree_edit import tree_edit_distance
from test_descriptors import shape_of
from test_metrics import all_lists
from test_tree_edit import TOY_CENTROIDS, toy_model


def sweep_otsu(img):
    """Exhaustive 256-way sweep of w0*w1*(mu0-mu1)^2 in exact rationals."""
    px = np.asarray(img).ravel().astype(int)
    n = len(px)
    best, best_t = None, None
    for t in range(256):
        lo, hi = px[px <= t], px[px > t]
        if len(lo) == 0 or len(hi) == 0:
            continue
        w0, w1 = Fraction(len(lo), n), Fraction(len(hi), n)
        mu0, mu1 = Fraction(int(lo.sum()), len(lo)), Fraction(int(hi.sum()), len(hi))
        var = w0 * w1 * (mu0 - mu1) ** 2
        if best is None or var > best:
            best, best_t = var, t
    return best_t


def test_criterion_1_otsu_exact():
    rng = np.random.default_rng(1)
    images = []
    for i in range(100):
        if i % 3 == 0:
            img = rng.integers(0, 256, size=(32, 32))
        elif i % 3 == 1:
            img = np.where(rng.random((32, 32)) < rng.uniform(0.1, 0.9),
                           rng.normal(60, 20, (32, 32)), rng.normal(190, 25, (32, 32)))
        else:
            img = rng.integers(rng.integers(0, 128), rng.integers(128, 256), size=(32, 32))
        images.append(np.clip(img, 0, 255).astype(np.uint8))
    t0 = time.perf_counter()
    ours = [otsu_threshold(img) for img in images]
    elapsed = time.perf_counter() - t0
    mismatches = sum(a != sweep_otsu(img) for a, img in zip(ours, images))
    record(1, mismatches == 0 and elapsed < 1.0,
           f"{100 - mismatches}/100 exact matches, {elapsed:.3f} s")


def test_criterion_2_ted_brute_force():
    m = toy_model()
    dist = word_distance_oracle(TOY_CENTROIDS)
    trees = canonical_trees(4, 3)
    t0 = time.perf_counter()
    cache, worst, pairs = {}, 0.0, 0
    for a in trees:
        for b in trees:
            key = (a.parent, b.parent)
            if key not in cache:
                cache[key] = mapping_matrix(tai_mappings(a.parent, b.parent), len(a), len(b))
            want = brute_force_ted(a.words, a.parent, b.words, b.parent, dist, cache[key])
            worst = max(worst, abs(tree_edit_distance(a, b, m) - want))
            pairs += 1
    elapsed = time.perf_counter() - t0
    record(2, pairs >= 500 and worst <= 1e-9 and elapsed < 30,
           f"{pairs} pairs, max |delta| {worst:.2e}, {elapsed:.1f} s")


def _signature(skel, shapes, node):
    return (shapes[node].kind, tuple(sorted(_signature(skel, shapes, c) for c in skel.children[node])))


def test_criterion_3_circle_square_cloud_hierarchy():
    binary = circle_square_cloud()
    want = (HOLE, ((OBJECT, ()), (OBJECT, ((HOLE, ()),))))
    results = []
    for name, img in (("binary", binary), ("pipeline", binarize_pipeline(binary.astype(np.uint8) * 255))):
        dec, skel = decompose(img)
        sig = _signature(skel, dec.shapes, skel.root)
        # circle is the object with a child; it must be larger than the square hole inside it
        circle = next(n for n in skel.children[skel.root] if skel.children[n])
        cloud = next(n for n in skel.children[skel.root] if not skel.children[n])
        hole = skel.children[circle][0]
        sizes_ok = dec.shapes[circle].area > dec.shapes[hole].area and dec.shapes[cloud].area > 0
        results.append((name, sig == want and len(skel.nodes) == 4 and sizes_ok))
    record(3, all(ok for _, ok in results),
           ", ".join(f"{n}: {'root->{circle->square, cloud}' if ok else 'wrong tree'}" for n, ok in results))


def test_criterion_4_descriptor_invariance():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    zm_rot_ok = contour_rot = trans_ok = 0
    worst_rot = worst_contour_scale = worst_zm_scale = 0.0
    strict_zm = []
    for _ in range(50):
        img, (kind, params, angle) = random_shape(rng, radius=40.0)
        f = describe_shape(shape_of(img))
        rot_ok = True
        for k in (1, 2, 3):
            g = describe_shape(shape_of(np.rot90(img, k)))
            rot_ok &= np.array_equal(g[:25], f[:25])
            worst_rot = max(worst_rot, float(np.max(np.abs(g[25:] - f[25:]) / np.abs(f[25:]))))
        zm_rot_ok += rot_ok
        contour_rot += worst_rot <= 0.05
        shifted = np.pad(img, ((11, 3), (5, 17)))
        trans_ok += np.array_equal(describe_shape(shape_of(shifted)), f)
        for factor in (2, 3):
            g = describe_shape(shape_of(render_shape(kind, params, angle, 40.0 * factor)))
            worst_contour_scale = max(worst_contour_scale,
                                      float(np.max(np.abs(g[25:] - f[25:]) / np.abs(f[25:]))))
            # moments are scaled against the shape's own zeroth-order magnitude (see README)
            worst_zm_scale = max(worst_zm_scale, float(np.max(np.abs(g[:25] - f[:25])) / f[0]))
            strict_zm.append(float(np.mean(np.abs(g[:25] - f[:25]) <= 0.05 * np.abs(f[:25]))))
    elapsed = time.perf_counter() - t0
    ok = (zm_rot_ok == 50 and worst_rot <= 0.05 and trans_ok == 50 and worst_contour_scale <= 0.05
          and worst_zm_scale <= 0.05 and elapsed < 60)
    record(4, ok, f"rotation: Zernike bit-stable {zm_rot_ok}/50, contour max {worst_rot:.3%}; "
                  f"translation exact {trans_ok}/50; scaling: contour max {worst_contour_scale:.2%}, "
                  f"Zernike max {worst_zm_scale:.2%} of |Z00| "
                  f"(per-moment relative: {np.mean(strict_zm):.0%} within 5%); {elapsed:.1f} s")


def test_criterion_5_analytic_values():
    d = shape_of(disk(121, 121, 60, 60, 50))
    s = shape_of(square(100, 100, 10, 10, 80))
    circ = circularity(d.contour, d.filled_area)
    ecc = eccentricity(d.contour)
    conv = convexity(d.contour)
    bend = bending_energy(d.contour)
    circ_sq = circularity(s.contour, s.filled_area)
    ok = (abs(circ - 1) <= 0.08 and abs(ecc - 1) <= 0.05 and abs(conv - 1) <= 0.03
          and abs(bend / (4 * math.pi ** 2) - 1) <= 0.10 and abs(circ_sq / (4 / math.pi) - 1) <= 0.08)
    record(5, ok, f"disk circularity {circ:.4f}, eccentricity {ecc:.4f}, convexity {conv:.4f}, "
                  f"bending {bend / (4 * math.pi ** 2):.4f}x4pi^2; square circularity "
                  f"{circ_sq / (4 / math.pi):.4f}x4/pi")


@pytest.fixture(scope="module")
def corpus():
    ds = generate_synthetic_corpus(10, 20, seed=0)
    t0 = time.perf_counter()
    analyses, failures = analyze_dataset(ds)
    assert not failures
    return ds, analyses, time.perf_counter() - t0


def test_criterion_6_self_and_invariant_retrieval(corpus):
    ds, analyses, t_analyze = corpus
    t0 = time.perf_counter()
    model = train_model(ds, 20, 0.7, seed=0, analyses=analyses)
    self_ok = sum(
        (lambda r: r.items[0].image_id == it.image_id and r.items[0].dissimilarity == 0.0)(
            query_analysis(model.index, model, analyses[it.image_id], 1))
        for it in ds.items)
    rng = np.random.default_rng(6)
    dup_ok = n_dup = 0
    for i, it in enumerate(ds.items):
        img = it.load()
        # translate inside a larger canvas; rolling would wrap shapes that touch the border
        dy, dx = (int(v) for v in rng.integers(1, 13, size=2))
        moved = np.pad(img, ((dy, 12 - dy), (dx, 12 - dx)))
        for variant in (np.rot90(img, i % 3 + 1), moved):
            res = query(model.index, model, variant, 1)
            dup_ok += res.items[0].image_id == it.image_id
            n_dup += 1
    elapsed = time.perf_counter() - t0 + t_analyze
    record(6, self_ok == len(ds) and dup_ok == n_dup and elapsed < 300,
           f"self rank-1 at 0: {self_ok}/{len(ds)}; rotated/translated duplicates: {dup_ok}/{n_dup}; "
           f"{elapsed:.0f} s")


def test_criterion_7_baseline_dominance(corpus):
    ds, analyses, t_analyze = corpus
    t0 = time.perf_counter()
    # k is chosen the way the method prescribes: best HoVW MAP over a k sweep at h = 0.7
    runs = {k: cross_validate(ds, k, 0.7, seed=0, folds=10, analyses=analyses) for k in (2, 4, 8, 16, 32)}
    best_k = max(runs, key=lambda k: (runs[k]["hovw"].map, -k))
    hovw, zm = runs[best_k]["hovw"].precision, runs[best_k]["zm"].precision
    elapsed = time.perf_counter() - t0 + t_analyze
    gap = hovw - zm
    record(7, bool(np.all(gap >= 0)) and elapsed < 900,
           f"k={best_k} by MAP sweep; HoVW MAP {runs[best_k]['hovw'].map:.4f} vs ZM "
           f"{runs[best_k]['zm'].map:.4f}; min precision gap {gap.min():+.4f} over 20 recall points; "
           f"{elapsed:.0f} s")


def test_criterion_8_metric_oracles():
    bad = 0
    for rel in all_lists(6):
        for n_rel in range(max(sum(rel), 1), sum(rel) + 2):
            bad += not np.allclose(precision_recall_curve(rel, n_rel), brute_precision_at_recall(rel, n_rel),
                                   rtol=0, atol=1e-12)
        bad += abs(average_precision(rel) - brute_average_precision(rel)) > 1e-12
        p = float(np.mean(rel))
        bad += abs(f1_score(p) - (2 * p / (p + 1) if p else 0.0)) > 1e-12
    # worked example: the query's own bucket holds two of three relevant items and one
    # irrelevant item; the next bucket holds the third relevant item
    stages = bucket_precision_recall([True, True, False, True], [3, 1], 3)
    pct = [(math.floor(100 * p), math.floor(100 * r)) for p, r in stages]
    example_ok = pct == [(66, 66), (66, 100)]
    record(8, bad == 0 and example_ok,
           f"brute-force mismatches {bad}; worked example stages (precision%, recall%) {pct}, "
           f"expected [(66, 66), (66, 100)]")


def test_criterion_9_mpeg7():
    root = os.environ.get("HOVW_MPEG7")
    if not root:
        record_skip(9, "HOVW_MPEG7 not set; MPEG-7 CE-1 not supplied")
        pytest.skip("MPEG-7 CE-1 not supplied (set HOVW_MPEG7)")
    from hovw.dataset import load_dataset
    from hovw.metrics import RECALL_GRID
    ds = load_dataset(root).categorized()
    rep = cross_validate(ds, 800, 0.7, seed=0, folds=10, baseline=False)["hovw"]
    upto = [p for r, p in zip(RECALL_GRID, rep.precision) if r <= 0.55 + 1e-12]
    p_full = rep.precision_at_full_recall
    ok = min(upto) >= 0.95 and abs(p_full - 0.72) <= 0.08 and abs(rep.f1 - 0.85) <= 0.05
    record(9, ok, f"min precision up to recall 0.55: {min(upto):.4f}; precision at full recall "
                  f"{p_full:.4f}; F1 {rep.f1:.4f} (fold-mean F1 {rep.f1_fold_mean:.4f})")
