"""Seeded synthetic datasets.

Two generators live here:

* :func:`make_count_fixture` builds a split whose per-class instance counts
  equal the published training or validation counts. Boxes are random; the
  fixture exercises counting and file handling, not detection quality.
* :func:`write_pipeline_corpus` writes the small 20-page corpus bundled with
  the package (validation, labeled, unlabeled pages plus simulated teacher
  detections) used by the demos and the end-to-end tests.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .annotation_io import save_dataset, save_detections
from .core import BoundingBox, DatasetSplit, Detection, GroundTruthInstance, ImageRecord, LayoutCategory

# Per-category instance counts of the reference dataset, in category-id order.
INSTANCE_COUNTS = {
    "training": (
        42158, 11455, 217257, 25217, 2067, 643, 8136, 113145, 6258, 5553, 2217, 4276,
        3566, 25001, 289, 11546, 3144, 11138, 10849, 15668, 6599, 1654, 2093,
    ),
    "validation": (
        715, 230, 3342, 430, 15, 7, 161, 1961, 127, 109, 32, 35,
        38, 430, 10, 245, 52, 247, 303, 359, 171, 27, 32,
    ),
}
NUM_IMAGES = {"training": 30000, "validation": 500}
PAGE_SIZE = (1000, 1400)


def make_count_fixture(which: str = "validation", seed: int = 0) -> DatasetSplit:
    """Split with exactly the reference per-class counts for ``which`` ("training" or "validation")."""
    counts = INSTANCE_COUNTS[which]
    n_images = NUM_IMAGES[which]
    rng = np.random.default_rng(seed)
    page_w, page_h = PAGE_SIZE
    images = tuple(ImageRecord(i, page_w, page_h, f"{which}_{i:05d}.png") for i in range(1, n_images + 1))

    labels = np.repeat(np.arange(len(counts)), counts)
    rng.shuffle(labels)
    n = len(labels)
    image_ids = rng.integers(1, n_images + 1, size=n)
    w = rng.integers(10, 400, size=n)
    h = rng.integers(8, 200, size=n)
    x = rng.integers(0, page_w - w + 1)
    y = rng.integers(0, page_h - h + 1)
    order = np.lexsort((labels, image_ids))
    cats = list(LayoutCategory)
    annotations = tuple(
        GroundTruthInstance(
            int(image_ids[k]), cats[labels[k]], BoundingBox(int(x[k]), int(y[k]), int(w[k]), int(h[k]))
        )
        for k in order
    )
    return DatasetSplit(images, annotations, "validation" if which == "validation" else "labeled")


def _page_layout(rng: np.random.Generator, image_id: int, page_w: int, page_h: int) -> list[GroundTruthInstance]:
    # Stacked blocks in one or two columns; weights favour the common classes.
    weights = np.array(INSTANCE_COUNTS["validation"], dtype=float) ** 0.5
    weights /= weights.sum()
    cats = list(LayoutCategory)
    columns = int(rng.integers(1, 3))
    col_w = (page_w - 80) / columns
    out = []
    for col in range(columns):
        y = 60.0
        x0 = 40 + col * col_w
        while True:
            bh = float(rng.integers(20, 160))
            if y + bh > page_h - 60:
                break
            bw = float(rng.integers(int(col_w * 0.4), int(col_w) - 10))
            cat = cats[int(rng.choice(len(cats), p=weights))]
            out.append(GroundTruthInstance(image_id, cat, BoundingBox(float(round(x0)), y, bw, bh)))
            y += bh + float(rng.integers(12, 40))
    return out


def _simulate_teacher(rng: np.random.Generator, image_id, gts: list[GroundTruthInstance], page_w, page_h) -> list[Detection]:
    """Noisy detections: most regions found with jittered boxes, some misses, a few spurious boxes."""
    dets = []
    cats = list(LayoutCategory)
    for g in gts:
        if rng.random() < 0.1:
            continue
        jitter = rng.normal(0, 0.04, size=4) * np.array([g.box.w, g.box.h, g.box.w, g.box.h])
        x = min(max(0.0, g.box.x + jitter[0]), page_w - 2)
        y = min(max(0.0, g.box.y + jitter[1]), page_h - 2)
        w = min(max(1.0, g.box.w + jitter[2]), page_w - x)
        h = min(max(1.0, g.box.h + jitter[3]), page_h - y)
        cat = g.category if rng.random() > 0.08 else cats[int(rng.integers(len(cats)))]
        score = float(np.round(rng.beta(6, 2), 4))
        dets.append(Detection(g.image_id, cat, BoundingBox(round(x, 1), round(y, 1), round(w, 1), round(h, 1)), score))
    for _ in range(int(rng.integers(1, 5))):
        w = float(rng.integers(30, 300))
        h = float(rng.integers(15, 120))
        x = float(rng.integers(0, int(page_w - w)))
        y = float(rng.integers(0, int(page_h - h)))
        score = float(np.round(rng.beta(2, 5), 4))
        cat = cats[int(rng.integers(len(cats)))]
        dets.append(Detection(image_id, cat, BoundingBox(x, y, w, h), score))
    return dets


CORPUS_FILES = ("val.json", "val_preds.json", "train.json", "unlabeled.json", "unlabeled_preds.json")


def write_pipeline_corpus(directory, seed: int = 7) -> dict[str, Path]:
    """Write the 20-page corpus: 6 validation, 6 labeled and 8 unlabeled pages.

    Image ids are 1-6, 7-12 and 13-20 respectively. Returns the written paths keyed by file name.
    """
    directory = Path(directory)
    rng = np.random.default_rng(seed)
    page_w, page_h = 800, 1100
    groups = {"val": range(1, 7), "train": range(7, 13), "unlabeled": range(13, 21)}
    splits = {}
    preds = {}
    for name, ids in groups.items():
        images = tuple(ImageRecord(i, page_w, page_h, f"page_{i:03d}.png") for i in ids)
        gts, dets = [], []
        for i in ids:
            page = _page_layout(rng, i, page_w, page_h)
            gts.extend(page)
            dets.extend(_simulate_teacher(rng, i, page, page_w, page_h))
        label = {"val": "validation", "train": "labeled", "unlabeled": "unlabeled"}[name]
        splits[name] = DatasetSplit(images, tuple(gts) if name != "unlabeled" else (), label)
        preds[name] = dets
    paths = {f: directory / f for f in CORPUS_FILES}
    save_dataset(splits["val"], paths["val.json"])
    save_detections(preds["val"], paths["val_preds.json"])
    save_dataset(splits["train"], paths["train.json"])
    save_dataset(splits["unlabeled"], paths["unlabeled.json"])
    save_detections(preds["unlabeled"], paths["unlabeled_preds.json"])
    return paths


def bundled_corpus() -> dict[str, Path]:
    """Paths of the corpus files shipped inside the package."""
    root = Path(str(resources.files("doclayout_tools") / "data" / "corpus"))
    return {f: root / f for f in CORPUS_FILES}
