from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doclayout_tools.core import BoundingBox
from doclayout_tools.errors import MixedImage
from doclayout_tools.matching import greedy_match, iou, iou_matrix
from helpers import det, gt, random_instance
from oracles import exact_iou, greedy_replay, max_bipartite_matching

coord = st.integers(0, 50)
side = st.integers(0, 30)
boxes = st.builds(BoundingBox, coord, coord, side, side)


class TestIou:
    def test_identity(self):
        assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(0, 0, 10, 10)) == 1.0

    def test_half_shift(self):
        assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(5, 0, 10, 10)) == pytest.approx(1 / 3, abs=1e-15)

    def test_disjoint(self):
        assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 5, 5)) == 0.0

    def test_touching_edges(self):
        assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(10, 0, 10, 10)) == 0.0

    def test_degenerate(self):
        assert iou(BoundingBox(0, 0, 0, 0), BoundingBox(0, 0, 0, 0)) == 0.0
        assert iou(BoundingBox(2, 2, 0, 5), BoundingBox(0, 0, 10, 10)) == 0.0

    @given(boxes, boxes)
    def test_symmetric_and_bounded(self, a, b):
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0
        assert v == pytest.approx(float(exact_iou(a.to_list(), b.to_list())), abs=1e-12)

    @given(boxes)
    def test_self_overlap(self, a):
        assert iou(a, a) == (1.0 if a.area > 0 else 0.0)

    @given(boxes, st.integers(0, 10), st.integers(0, 10), st.integers(0, 10), st.integers(0, 10))
    def test_containment(self, inner, l, t, r, b):
        outer = BoundingBox(inner.x - l, inner.y - t, inner.w + l + r, inner.h + t + b)
        if inner.area == 0:
            return
        assert iou(inner, outer) == pytest.approx(inner.area / outer.area, rel=1e-12)

    @given(st.lists(boxes, max_size=6), st.lists(boxes, max_size=6))
    def test_matrix_agrees_with_scalar(self, a, b):
        m = iou_matrix(a, b)
        assert m.shape == (len(a), len(b))
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                assert m[i, j] == iou(x, y)


class TestGreedyMatch:
    def test_exact_hit(self):
        r = greedy_match([det(1, "text", (0, 0, 10, 10), 0.9)], [gt(1, "text", (0, 0, 10, 10))])
        assert (r.tp, r.fp, r.fn) == (1, 0, 0)

    def test_single_gt_exclusivity(self):
        g = gt(1, "table", (0, 0, 100, 100))
        # both boxes overlap the GT at IoU 0.9
        d_low = det(1, "table", (0, 0, 100, 90), 0.8)
        d_high = det(1, "table", (0, 10, 100, 90), 0.9)
        assert iou(d_low.box, g.box) == pytest.approx(0.9)
        r = greedy_match([d_low, d_high], [g])
        assert r.detection_outcomes == ("fp", "tp")
        assert r.matched_gt == (-1, 0)
        assert r.gt_outcomes == ("matched",)

    def test_ignore_region(self):
        g = gt(1, "seal", (0, 0, 100, 100), ignore=True)
        r = greedy_match([det(1, "seal", (0, 0, 100, 80), 0.7)], [g])
        assert r.detection_outcomes == ("ignored",)
        assert (r.tp, r.fp, r.fn) == (0, 0, 0)
        assert r.gt_outcomes == ("ignored",)

    def test_ignore_region_absorbs_many(self):
        g = gt(1, "seal", (0, 0, 100, 100), ignore=True)
        dets = [det(1, "seal", (0, 0, 100, 90), s) for s in (0.9, 0.8, 0.7)]
        assert greedy_match(dets, [g]).detection_outcomes == ("ignored",) * 3

    def test_category_must_match(self):
        r = greedy_match([det(1, "text", (0, 0, 10, 10), 0.9)], [gt(1, "formula", (0, 0, 10, 10))])
        assert (r.tp, r.fp, r.fn) == (0, 1, 1)

    def test_score_ties_keep_input_order(self):
        g = gt(1, "text", (0, 0, 10, 10))
        r = greedy_match([det(1, "text", (0, 0, 10, 9), 0.5), det(1, "text", (0, 0, 10, 10), 0.5)], [g])
        assert r.detection_outcomes == ("tp", "fp")

    def test_best_iou_wins_over_first_gt(self):
        gts = [gt(1, "text", (0, 0, 10, 10)), gt(1, "text", (2, 0, 10, 10))]
        r = greedy_match([det(1, "text", (2, 0, 10, 10), 0.9)], gts)
        assert r.matched_gt == (1,)

    def test_threshold_boundary_inclusive(self):
        # IoU exactly 0.5
        d = det(1, "text", (0, 0, 10, 10), 0.9)
        g = gt(1, "text", (0, 0, 10, 5))
        assert iou(d.box, g.box) == 0.5
        assert greedy_match([d], [g], 0.5).tp == 1
        assert greedy_match([d], [g], 0.51).tp == 0

    def test_mixed_image(self):
        with pytest.raises(MixedImage):
            greedy_match([det(1, "text", (0, 0, 1, 1), 0.5)], [gt(2, "text", (0, 0, 1, 1))])

    def test_empty(self):
        r = greedy_match([], [gt(1, "text", (0, 0, 1, 1))])
        assert (r.tp, r.fp, r.fn) == (0, 0, 1)
        assert greedy_match([], []).detection_outcomes == ()


def _single_image(dets, split):
    image = dets[0].image_id if dets else 1
    return ([d for d in dets if d.image_id == image],
            [g for g in split.annotations if g.image_id == image])


def test_counts_and_replay_on_random_instances(rng):
    for _ in range(400):
        dets, split = random_instance(rng, max_dets=6, max_gts=6, n_images=1, ignore_prob=0.25)
        dets, gts = _single_image(dets, split)
        thr = float(rng.choice([0.3, 0.5, 0.75]))
        r = greedy_match(dets, gts, thr)
        assert r.tp + r.fp + r.ignored == len(dets)
        assert r.tp + r.fn == sum(not g.ignore for g in gts)
        assert r.gt_outcomes.count("matched") == r.tp
        matched = [j for j in r.matched_gt if j >= 0 and not gts[j].ignore]
        assert len(matched) == len(set(matched))
        assert list(r.detection_outcomes) == greedy_replay(dets, gts, thr)


def test_greedy_equals_maximum_matching_without_shared_overlaps(rng):
    checked = 0
    while checked < 150:
        dets, split = random_instance(rng, max_dets=6, max_gts=6, n_images=1, ignore_prob=0.0)
        dets, gts = _single_image(dets, split)
        scores = [d.score for d in dets]
        if len(set(scores)) != len(scores):
            continue
        overlaps = [
            sum(1 for g in gts if g.category == d.category and exact_iou(d.box.to_list(), g.box.to_list()) >= Fraction(1, 2))
            for d in dets
        ]
        if any(n > 1 for n in overlaps):
            continue
        assert greedy_match(dets, gts, 0.5).tp == max_bipartite_matching(dets, gts, 0.5)
        checked += 1


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_replay_property(seed):
    dets, split = random_instance(np.random.default_rng(seed), max_dets=6, max_gts=6, n_images=1,
                                  ignore_prob=0.3, score_grid=4)
    dets, gts = _single_image(dets, split)
    assert list(greedy_match(dets, gts, 0.5).detection_outcomes) == greedy_replay(dets, gts, 0.5)
