"""Precision, recall, F1, PR curves, average precision and mAP.

Every score cutoff is strict: a detection counts at threshold ``t`` only if
its score is ``> t``. Empty ratios (0/0) are defined as 0.
"""

from __future__ import annotations

import logging
import math
from bisect import bisect_right
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import DatasetSplit, Detection, GroundTruthInstance, LayoutCategory, as_category
from .errors import EmptyDataset, NoGroundTruth
from .matching import FP, IGNORED, TP, greedy_match

logger = logging.getLogger(__name__)

INTERPOLATIONS = ("coco101", "allpoint")
# i/100 rather than linspace so a recall of exactly k/100 compares equal to its threshold
RECALL_THRESHOLDS = np.arange(101) / 100.0


@dataclass(frozen=True)
class PrPoint:
    score_threshold: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int


def make_point(score_threshold: float, tp: int, fp: int, fn: int) -> PrPoint:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return PrPoint(float(score_threshold), precision, recall, tp, fp, fn)


def f1(point: PrPoint) -> float:
    p, r = point.precision, point.recall
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def _gt_list(gts) -> Sequence[GroundTruthInstance]:
    return gts.annotations if isinstance(gts, DatasetSplit) else gts


def _by_image(items: Iterable) -> dict:
    groups: dict = defaultdict(list)
    for item in items:
        groups[item.image_id].append(item)
    return groups


def count_positives(gts, category) -> int:
    category = as_category(category)
    return sum(1 for g in _gt_list(gts) if g.category == category and not g.ignore)


def ranked_outcomes(
    detections: Sequence[Detection],
    gts,
    category,
    iou_thr: float = 0.5,
) -> list[tuple[float, str]]:
    """Match every detection of ``category`` and list ``(score, outcome)`` by descending score.

    Greedy matching decides each detection using only higher-ranked ones, so
    the first k entries are exactly what matching the top-k detections alone
    would give. Ties in score keep input order.
    """
    category = as_category(category)
    dets = [d for d in detections if d.category == category]
    positions: dict = defaultdict(list)
    for i, d in enumerate(dets):
        positions[d.image_id].append(i)
    gt_groups = _by_image(g for g in _gt_list(gts) if g.category == category)
    outcomes = [FP] * len(dets)
    for image_id, idx in positions.items():
        result = greedy_match([dets[i] for i in idx], gt_groups.get(image_id, []), iou_thr)
        for i, outcome in zip(idx, result.detection_outcomes):
            outcomes[i] = outcome
    order = sorted(range(len(dets)), key=lambda i: -dets[i].score)
    return [(dets[i].score, outcomes[i]) for i in order]


def prf_at_threshold(
    detections: Sequence[Detection],
    gts,
    category,
    score_thr: float,
    iou_thr: float = 0.5,
) -> PrPoint:
    """Precision and recall of ``category`` keeping only detections scoring strictly above ``score_thr``."""
    category = as_category(category)
    kept = [d for d in detections if d.category == category and d.score > score_thr]
    gt_groups = _by_image(g for g in _gt_list(gts) if g.category == category)
    tp = fp = 0
    for image_id, image_dets in _by_image(kept).items():
        result = greedy_match(image_dets, gt_groups.get(image_id, []), iou_thr)
        tp += result.tp
        fp += result.fp
    fn = count_positives(gts, category) - tp
    return make_point(score_thr, tp, fp, fn)


def candidate_thresholds(scores: Iterable[float]) -> list[float]:
    """Thresholds at which a strict ``score > t`` filter can change, ascending.

    For each distinct positive score s the candidate is the largest float below
    s, so the filter keeps s and everything above it. 0.0 (keep all positive
    scores) and 1.0 (keep nothing) are always included.
    """
    cands = {0.0, 1.0}
    for s in set(scores):
        if s > 0.0:
            cands.add(float(np.nextafter(s, -np.inf)))
    return sorted(cands)


def pr_curve(
    detections: Sequence[Detection],
    gts,
    category,
    iou_thr: float = 0.5,
) -> list[PrPoint]:
    """PR points at every :func:`candidate_thresholds` value, ascending in threshold.

    Uses a single matching pass; each point equals ``prf_at_threshold`` at the
    same threshold.
    """
    ranked = ranked_outcomes(detections, gts, category, iou_thr)
    npos = count_positives(gts, category)
    cum_tp = np.concatenate([[0], np.cumsum([o == TP for _, o in ranked])]).astype(int)
    cum_fp = np.concatenate([[0], np.cumsum([o == FP for _, o in ranked])]).astype(int)
    ascending = [s for s, _ in reversed(ranked)]
    points = []
    for thr in candidate_thresholds(ascending):
        n_kept = len(ascending) - bisect_right(ascending, thr)
        tp, fp = int(cum_tp[n_kept]), int(cum_fp[n_kept])
        points.append(make_point(thr, tp, fp, npos - tp))
    return points


def _envelope(precision: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(precision[::-1])[::-1]


def average_precision(
    detections: Sequence[Detection],
    gts,
    category,
    iou_thr: float = 0.5,
    interp: str = "coco101",
) -> float:
    """Area under the monotone precision envelope for one class.

    ``interp="coco101"`` averages the envelope at recall 0, 0.01, ..., 1
    (0 where a recall level is never reached); ``"allpoint"`` integrates it
    exactly. Ignored detections are skipped.
    """
    if interp not in INTERPOLATIONS:
        raise ValueError(f"interp must be one of {INTERPOLATIONS}, got {interp!r}")
    category = as_category(category)
    npos = count_positives(gts, category)
    if npos == 0:
        raise NoGroundTruth(f"no ground truth for class {category.name}; AP is undefined")
    ranked = [o for _, o in ranked_outcomes(detections, gts, category, iou_thr) if o != IGNORED]
    if not ranked:
        return 0.0
    hits = np.array([o == TP for o in ranked])
    tp = np.cumsum(hits)
    fp = np.cumsum(~hits)
    recall = tp / npos
    precision = _envelope(tp / (tp + fp))
    if interp == "allpoint":
        steps = np.diff(np.concatenate([[0.0], recall]))
        return float(np.sum(steps * precision))
    idx = np.searchsorted(recall, RECALL_THRESHOLDS, side="left")
    q = np.where(idx < len(recall), precision[np.minimum(idx, len(recall) - 1)], 0.0)
    return float(np.mean(q))


@dataclass(frozen=True)
class EvalReport:
    """Per-class AP table plus their mean over classes that have ground truth.

    ``ap[c]`` is None for classes without ground truth; those are left out of
    ``map50``. ``map50`` is NaN when no class has ground truth.
    """

    ap: dict
    map50: float
    curves: dict = field(repr=False)
    gt_counts: dict = field(repr=False)
    det_counts: dict = field(repr=False)
    iou_threshold: float = 0.5
    interp: str = "coco101"
    num_images: int = 0

    def to_json(self) -> dict:
        return {
            "iou_threshold": self.iou_threshold,
            "interpolation": self.interp,
            "num_images": self.num_images,
            "map50": None if math.isnan(self.map50) else self.map50,
            "classes": [
                {
                    "id": int(c),
                    "name": c.name,
                    "ap": self.ap[c],
                    "num_gt": self.gt_counts[c],
                    "num_detections": self.det_counts[c],
                }
                for c in LayoutCategory
            ],
        }

    def to_text(self) -> str:
        lines = [f"{'id':>3}  {'category':<16}{'gt':>8}{'dets':>8}{'AP':>9}"]
        for c in LayoutCategory:
            ap = self.ap[c]
            ap_s = "n/a" if ap is None else f"{100 * ap:.2f}"
            lines.append(f"{int(c):>3}  {c.name:<16}{self.gt_counts[c]:>8}{self.det_counts[c]:>8}{ap_s:>9}")
        m = "n/a" if math.isnan(self.map50) else f"{100 * self.map50:.2f}"
        lines.append(f"mAP@{self.iou_threshold:g} ({self.interp}): {m}")
        return "\n".join(lines)


def evaluate(
    detections: Sequence[Detection],
    split: DatasetSplit,
    iou_thr: float = 0.5,
    interp: str = "coco101",
    threads: int = 1,
) -> EvalReport:
    if not split.images:
        raise EmptyDataset("cannot evaluate against a split with zero images")
    known = split.image_index
    dets = [d for d in detections if d.image_id in known]
    if len(dets) != len(detections):
        logger.warning("dropped %d detection(s) on images absent from the ground truth", len(detections) - len(dets))
    dets_by_class = defaultdict(list)
    for d in dets:
        dets_by_class[d.category].append(d)
    gts_by_class = defaultdict(list)
    for g in split.annotations:
        gts_by_class[g.category].append(g)

    def one_class(c: LayoutCategory):
        cd, cg = dets_by_class[c], gts_by_class[c]
        curve = pr_curve(cd, cg, c, iou_thr)
        ap = average_precision(cd, cg, c, iou_thr, interp) if count_positives(cg, c) else None
        return c, ap, curve

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(one_class, LayoutCategory))

    ap = {c: a for c, a, _ in results}
    valid = [a for a in ap.values() if a is not None]
    map50 = float(np.mean(valid)) if valid else float("nan")
    return EvalReport(
        ap=ap,
        map50=map50,
        curves={c: curve for c, _, curve in results},
        gt_counts={c: count_positives(gts_by_class[c], c) for c in LayoutCategory},
        det_counts={c: len(dets_by_class[c]) for c in LayoutCategory},
        iou_threshold=float(iou_thr),
        interp=interp,
        num_images=len(split.images),
    )
