"""Builders for small detection problems shared by the test modules."""

from __future__ import annotations

import numpy as np

from doclayout_tools.core import (
    BoundingBox,
    DatasetSplit,
    Detection,
    GroundTruthInstance,
    ImageRecord,
    LayoutCategory,
)

PAGE = 40

# Lines collected by test_acceptance and echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def _rand_box(rng):
    w = int(rng.integers(2, 16))
    h = int(rng.integers(2, 16))
    return BoundingBox(int(rng.integers(0, PAGE - w)), int(rng.integers(0, PAGE - h)), w, h)


def _near(rng, box):
    dx, dy, dw, dh = rng.integers(-2, 3, size=4)
    x = min(max(0, box.x + dx), PAGE - 2)
    y = min(max(0, box.y + dy), PAGE - 2)
    w = min(max(1, box.w + dw), PAGE - x)
    h = min(max(1, box.h + dh), PAGE - y)
    return BoundingBox(x, y, w, h)


def random_instance(
    rng: np.random.Generator,
    max_dets: int = 8,
    max_gts: int = 5,
    n_classes: int = 3,
    n_images: int = 2,
    ignore_prob: float = 0.1,
    score_grid: int | None = None,
    label: str = "validation",
):
    """Small detection problem on integer boxes: (detections, split).

    Detections mostly sit near a ground-truth box (often of the right class),
    the rest are random. With ``score_grid`` scores are multiples of
    1/score_grid, which makes ties likely.
    """
    cats = [LayoutCategory(int(c)) for c in rng.choice(23, size=n_classes, replace=False)]
    images = tuple(ImageRecord(i, PAGE, PAGE) for i in range(1, n_images + 1))
    gts = []
    for _ in range(int(rng.integers(0, max_gts + 1))):
        gts.append(
            GroundTruthInstance(
                int(rng.integers(1, n_images + 1)),
                cats[int(rng.integers(n_classes))],
                _rand_box(rng),
                ignore=bool(rng.random() < ignore_prob),
            )
        )
    dets = []
    for _ in range(int(rng.integers(0, max_dets + 1))):
        if gts and rng.random() < 0.7:
            g = gts[int(rng.integers(len(gts)))]
            cat = g.category if rng.random() < 0.8 else cats[int(rng.integers(n_classes))]
            image_id, box = g.image_id, _near(rng, g.box)
        else:
            image_id, cat, box = int(rng.integers(1, n_images + 1)), cats[int(rng.integers(n_classes))], _rand_box(rng)
        if score_grid:
            score = int(rng.integers(1, score_grid + 1)) / score_grid
        else:
            score = float(rng.random())
        dets.append(Detection(image_id, cat, box, score))
    return dets, DatasetSplit(images, tuple(gts), label)


def det(image_id, cat, box, score):
    return Detection(image_id, LayoutCategory[cat] if isinstance(cat, str) else cat, BoundingBox(*box), score)


def gt(image_id, cat, box, ignore=False):
    return GroundTruthInstance(image_id, LayoutCategory[cat] if isinstance(cat, str) else cat, BoundingBox(*box), ignore)


def split_of(gts, n_images=1, label="validation", size=100):
    return DatasetSplit(tuple(ImageRecord(i, size, size) for i in range(1, n_images + 1)), tuple(gts), label)
