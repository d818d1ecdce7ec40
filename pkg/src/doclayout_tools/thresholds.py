"""Per-class score thresholds chosen to maximize F1 on a validation split."""

from __future__ import annotations

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .core import DatasetSplit, Detection, LayoutCategory, ThresholdTable, as_category
from .errors import IoError, NoGroundTruth
from .metrics import PrPoint, count_positives, f1, pr_curve

logger = logging.getLogger(__name__)

DEFAULT_FALLBACK = 0.5


@dataclass(frozen=True)
class SweepTrace:
    category: LayoutCategory
    candidates: tuple[tuple[float, PrPoint, float], ...]
    chosen: float
    chosen_f1: float

    def to_csv(self, path) -> None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["threshold", "precision", "recall", "f1", "tp", "fp", "fn"])
                for thr, point, score in self.candidates:
                    writer.writerow([repr(thr), repr(point.precision), repr(point.recall), repr(score),
                                     point.tp, point.fp, point.fn])
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc


def optimize_class_threshold(
    detections: Sequence[Detection],
    val: DatasetSplit,
    category,
    iou_thr: float = 0.5,
) -> SweepTrace:
    """Exact F1-maximizing threshold for one class.

    F1 as a function of the cutoff only changes at detection scores, so
    evaluating each candidate from :func:`candidate_thresholds` covers the
    whole of [0, 1]. Among maximizers the largest threshold wins.
    """
    if val.label != "validation":
        raise ValueError(f"threshold optimization needs a validation split, got {val.label!r}")
    category = as_category(category)
    if count_positives(val, category) == 0:
        raise NoGroundTruth(f"validation split has no ground truth for {category.name}")
    candidates = tuple((p.score_threshold, p, f1(p)) for p in pr_curve(detections, val, category, iou_thr))
    best_thr, _, best_f1 = candidates[0]
    for thr, _, score in candidates[1:]:
        if score >= best_f1:
            best_thr, best_f1 = thr, score
    return SweepTrace(category, candidates, best_thr, best_f1)


def sweep_all(
    detections: Sequence[Detection],
    val: DatasetSplit,
    iou_thr: float = 0.5,
    threads: int = 1,
) -> dict[LayoutCategory, SweepTrace]:
    """Sweep traces for every class that has validation ground truth, keyed in id order."""
    by_class: dict = {c: [] for c in LayoutCategory}
    for d in detections:
        by_class[d.category].append(d)

    def one(c: LayoutCategory):
        try:
            return optimize_class_threshold(by_class[c], val, c, iou_thr)
        except NoGroundTruth:
            return None

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one, LayoutCategory))
    return {c: t for c, t in zip(LayoutCategory, results) if t is not None}


def table_from_traces(
    traces: dict[LayoutCategory, SweepTrace],
    fallback: float = DEFAULT_FALLBACK,
    note: str = "",
) -> ThresholdTable:
    if not 0.0 <= fallback <= 1.0:
        raise ValueError(f"fallback must lie in [0, 1], got {fallback}")
    fell_back = tuple(c for c in LayoutCategory if c not in traces)
    if fell_back:
        logger.warning("no validation ground truth for %d class(es); using fallback %g: %s",
                       len(fell_back), fallback, ", ".join(c.name for c in fell_back))
    values = tuple(traces[c].chosen if c in traces else fallback for c in LayoutCategory)
    provenance = f"F1 sweep{note}; fallback {fallback:g} for: {', '.join(c.name for c in fell_back) or 'none'}"
    return ThresholdTable(values, provenance, fell_back)


def optimize_all(
    detections: Sequence[Detection],
    val: DatasetSplit,
    iou_thr: float = 0.5,
    fallback: float = DEFAULT_FALLBACK,
    threads: int = 1,
) -> ThresholdTable:
    """Optimize all 23 classes; classes without validation ground truth get ``fallback``.

    The fallback classes are recorded in ``fallback_classes`` and the provenance text.
    """
    if not 0.0 <= fallback <= 1.0:
        raise ValueError(f"fallback must lie in [0, 1], got {fallback}")
    traces = sweep_all(detections, val, iou_thr, threads)
    note = f" at IoU {iou_thr:g} over {len(val.images)} validation images"
    return table_from_traces(traces, fallback, note)
