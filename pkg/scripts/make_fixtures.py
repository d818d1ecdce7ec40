"""Regenerate the committed test fixtures and the bundled corpus.

    python3 scripts/make_fixtures.py

Writes:
  tests/fixtures/table6_validation.json.gz   per-class counts of the reference validation split
  tests/fixtures/three_class/{gt,dets,expected}.json
  src/doclayout_tools/data/corpus/*.json

The expected AP values of the three-class fixture come from the exact
rational oracle in tests/oracles.py, not from the package's metric code.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from doclayout_tools.annotation_io import save_dataset, save_detections  # noqa: E402
from doclayout_tools.core import (  # noqa: E402
    BoundingBox,
    DatasetSplit,
    Detection,
    GroundTruthInstance,
    ImageRecord,
    LayoutCategory,
)
from doclayout_tools.synthetic import make_count_fixture, write_pipeline_corpus  # noqa: E402
from oracles import oracle_ap, oracle_map  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"
CLASSES = (LayoutCategory.text, LayoutCategory.formula, LayoutCategory.table)


def three_class_problem(seed: int = 2024):
    rng = np.random.default_rng(seed)
    images = tuple(ImageRecord(i, 200, 200) for i in range(1, 5))
    gts, dets = [], []
    for image in images:
        for _ in range(int(rng.integers(3, 7))):
            cat = CLASSES[int(rng.integers(3))]
            w, h = (int(v) for v in rng.integers(10, 60, size=2))
            x, y = int(rng.integers(0, 200 - w)), int(rng.integers(0, 200 - h))
            g = GroundTruthInstance(image.id, cat, BoundingBox(x, y, w, h), ignore=bool(rng.random() < 0.1))
            gts.append(g)
            for _ in range(int(rng.integers(0, 3))):
                dx, dy, dw, dh = (int(v) for v in rng.integers(-6, 7, size=4))
                nx, ny = min(max(0, x + dx), 190), min(max(0, y + dy), 190)
                box = BoundingBox(nx, ny, min(max(2, w + dw), 200 - nx), min(max(2, h + dh), 200 - ny))
                dcat = cat if rng.random() < 0.85 else CLASSES[int(rng.integers(3))]
                dets.append(Detection(image.id, dcat, box, round(float(rng.random()), 3)))
        for _ in range(int(rng.integers(0, 3))):
            w, h = (int(v) for v in rng.integers(10, 60, size=2))
            box = BoundingBox(int(rng.integers(0, 200 - w)), int(rng.integers(0, 200 - h)), w, h)
            dets.append(Detection(image.id, CLASSES[int(rng.integers(3))], box, round(float(rng.random()), 3)))
    return dets, DatasetSplit(images, tuple(gts), "validation")


def write_three_class(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    dets, split = three_class_problem()
    save_dataset(split, directory / "gt.json")
    save_detections(dets, directory / "dets.json")
    expected = {}
    for interp in ("coco101", "allpoint"):
        aps, mean = oracle_map(dets, split.annotations, 0.5, interp)
        expected[interp] = {
            "ap": {LayoutCategory(c).name: str(v) for c, v in aps.items()},
            "map50": str(mean),
        }
    # one class evaluated at a stricter overlap, as a second operating point
    expected["coco101_iou75_text"] = str(oracle_ap(dets, split.annotations, LayoutCategory.text, 0.75))
    (directory / "expected.json").write_text(json.dumps(expected, indent=2) + "\n")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    save_dataset(make_count_fixture("validation", seed=0), FIXTURES / "table6_validation.json.gz")
    write_three_class(FIXTURES / "three_class")
    write_pipeline_corpus(ROOT / "src" / "doclayout_tools" / "data" / "corpus")


if __name__ == "__main__":
    main()
