import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays

from helpers import (containment_parents, disk, circle_square_cloud, flood_labels, left_neighbour_parents,
                     square)
from hovw.decompose import (HOLE, OBJECT, ComponentShape, build_hierarchy_skeleton, decompose,
                            extract_component_shapes, filter_small_shapes, skeleton_to_text)
from hovw.errors import ConsistencyError, InvalidParameterError


def _tree_signature(skel, shapes, node=None):
    node = skel.root if node is None else node
    kids = sorted(_tree_signature(skel, shapes, c) for c in skel.children[node])
    return (shapes[node].kind, tuple(kids))


def _triples(dec, skel):
    return sorted((skel.depth(n), dec.shapes[n].kind, dec.shapes[n].area) for n in skel.nodes)


def _match_oracle(img):
    """Compare decomposition with flood-fill labels and two parent oracles."""
    dec = extract_component_shapes(img)
    lab, kinds = flood_labels(img)
    assert len(dec.shapes) == len(kinds)
    # map our shapes to oracle components through any pixel of the label map
    ours = dec.labels - 1
    to_oracle = {}
    for s in dec.shapes:
        comps = set(lab[ours == s.id].tolist())
        assert len(comps) == 1, "shape must coincide with one flood-fill component"
        to_oracle[s.id] = comps.pop()
        assert kinds[to_oracle[s.id]] == (s.kind == OBJECT)
        assert s.area == int((lab == to_oracle[s.id]).sum())
    left = left_neighbour_parents(lab)
    for s in dec.shapes:
        expect = None if s.parent is None else to_oracle[s.parent]
        assert left[to_oracle[s.id]] == expect
    return dec, lab, kinds, to_oracle


class TestExtraction:
    def test_circle_square_cloud(self):
        dec = extract_component_shapes(circle_square_cloud())
        kinds = sorted(s.kind for s in dec.shapes)
        assert kinds == [HOLE, HOLE, OBJECT, OBJECT]
        skel = dec.skeleton
        assert _tree_signature(skel, dec.shapes) == (HOLE, ((OBJECT, ()), (OBJECT, ((HOLE, ()),))))

    def test_all_background(self):
        dec = extract_component_shapes(np.zeros((5, 7), dtype=bool))
        assert len(dec.shapes) == 1
        assert dec.shapes[0].kind == HOLE
        assert dec.shapes[0].area == 7 * 9

    def test_all_foreground(self):
        dec = extract_component_shapes(np.ones((4, 4), dtype=bool))
        assert [s.kind for s in dec.shapes] == [HOLE, OBJECT]
        assert dec.shapes[1].area == 16 and dec.shapes[1].parent == 0

    def test_concentric_rings_flood_fill_oracle(self):
        img = disk(41, 41, 20, 20, 18) & ~disk(41, 41, 20, 20, 12) | disk(41, 41, 20, 20, 6)
        dec, *_ = _match_oracle(img)
        assert len(dec.shapes) == 4
        depths = sorted(dec.skeleton.depth(n) for n in dec.skeleton.nodes)
        assert depths == [1, 2, 3, 4]

    def test_two_squares_are_siblings(self):
        img = square(20, 30, 4, 3, 8) | square(20, 30, 4, 18, 8)
        dec = extract_component_shapes(img)
        assert dec.skeleton.children[dec.skeleton.root] == [1, 2]

    def test_diagonal_foreground_is_one_object(self):
        img = np.eye(6, dtype=bool)
        dec = extract_component_shapes(img)
        assert sum(s.kind == OBJECT for s in dec.shapes) == 1

    @settings(max_examples=40, deadline=None)
    @given(arrays(bool, (9, 11)))
    def test_random_images_match_oracles(self, img):
        dec, lab, kinds, to_oracle = _match_oracle(img)
        contain = containment_parents(lab, kinds)
        for s in dec.shapes:
            expect = None if s.parent is None else to_oracle[s.parent]
            assert contain[to_oracle[s.id]] == expect

    @pytest.mark.parametrize("seed", range(5))
    def test_nested_rectangles_containment(self, seed):
        rng = np.random.default_rng(seed)
        img = np.zeros((24, 24), dtype=bool)
        for _ in range(6):
            y0, x0 = rng.integers(0, 20, size=2)
            hh, ww = rng.integers(2, 12, size=2)
            img[y0:y0 + hh, x0:x0 + ww] ^= True
        dec, lab, kinds, to_oracle = _match_oracle(img)
        contain = containment_parents(lab, kinds)
        for s in dec.shapes:
            expect = None if s.parent is None else to_oracle[s.parent]
            assert contain[to_oracle[s.id]] == expect


class TestInvariants:
    @settings(max_examples=30, deadline=None)
    @given(arrays(bool, (10, 8)))
    def test_partition_and_alternation(self, img):
        dec = extract_component_shapes(img)
        assert sum(s.area for s in dec.shapes) == (10 + 2) * (8 + 2)
        for child, par in dec.skeleton.parent.items():
            assert dec.shapes[child].kind != dec.shapes[par].kind

    @settings(max_examples=30, deadline=None)
    @given(arrays(bool, (9, 12)))
    def test_rotation_and_mirror_isomorphic(self, img):
        base = extract_component_shapes(img)
        ref = _triples(base, base.skeleton)
        for variant in (np.rot90(img), np.rot90(img, 2), np.fliplr(img), np.flipud(img)):
            dec = extract_component_shapes(variant)
            assert _triples(dec, dec.skeleton) == ref

    def test_deterministic(self):
        img = circle_square_cloud()
        a, b = extract_component_shapes(img), extract_component_shapes(img)
        assert a.skeleton.parent == b.skeleton.parent
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_contours_closed_and_counterclockwise(self):
        dec = extract_component_shapes(circle_square_cloud())
        for s in dec.shapes:
            c = s.contour
            step = np.abs(np.roll(c, -1, axis=0) - c).max(axis=1)
            assert np.all(step == 1)
            x, y = c[:, 0].astype(float), -c[:, 1].astype(float)  # y up as displayed
            area2 = np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
            assert area2 > 0

    def test_contour_bounds_region(self):
        dec = extract_component_shapes(circle_square_cloud())
        for s in dec.shapes[1:]:
            ys, xs = np.nonzero(s.filled)
            pts = set(zip((xs + s.origin[0]).tolist(), (ys + s.origin[1]).tolist()))
            assert set(map(tuple, s.contour.tolist())) <= pts


class TestSkeleton:
    def _shapes(self, parents):
        m = np.ones((1, 1), dtype=bool)
        return [ComponentShape(i, HOLE if i % 2 == 0 else OBJECT, 10, (0, 0), m, m,
                               np.zeros((1, 2), dtype=np.int64), p) for i, p in enumerate(parents)]

    def test_two_roots_rejected(self):
        with pytest.raises(ConsistencyError):
            build_hierarchy_skeleton(self._shapes([None, None]))

    def test_cycle_rejected(self):
        shapes = self._shapes([None, 2, 1])
        with pytest.raises(ConsistencyError):
            build_hierarchy_skeleton(shapes)

    def test_text(self):
        dec, skel = decompose(circle_square_cloud())
        text = skeleton_to_text(skel, dec.shapes)
        assert text.startswith("(hole#0 area=") and text.count("(") == 4


class TestFilter:
    def test_zero_is_identity(self):
        dec = extract_component_shapes(circle_square_cloud())
        pruned = filter_small_shapes(dec.skeleton, dec.shapes, 0)
        assert pruned.parent == dec.skeleton.parent

    def test_speck_removed(self):
        img = square(20, 20, 3, 3, 10)
        img[15, 16:18] = True  # two-pixel speck
        dec = extract_component_shapes(img)
        pruned = filter_small_shapes(dec.skeleton, dec.shapes, 4)
        assert len(pruned.nodes) == len(dec.skeleton.nodes) - 1
        assert all(dec.shapes[n].area >= 4 for n in pruned.nodes)

    def test_root_cannot_be_pruned(self):
        dec = extract_component_shapes(np.zeros((2, 2), dtype=bool))
        with pytest.raises(InvalidParameterError):
            filter_small_shapes(dec.skeleton, dec.shapes, 100)

    def test_negative_rejected(self):
        dec = extract_component_shapes(np.zeros((2, 2), dtype=bool))
        with pytest.raises(InvalidParameterError):
            filter_small_shapes(dec.skeleton, dec.shapes, -1)

    @settings(max_examples=30, deadline=None)
    @given(arrays(bool, (10, 10)))
    def test_matches_containment_recompute(self, img):
        dec, lab, kinds, to_oracle = _match_oracle(img)
        min_area = 3
        pruned = filter_small_shapes(dec.skeleton, dec.shapes, min_area)
        keep = [to_oracle[n] for n in pruned.nodes]
        contain = containment_parents(lab, kinds, keep)
        for n in pruned.nodes:
            if n == pruned.root:
                continue
            assert to_oracle[pruned.parent[n]] == contain[to_oracle[n]]
