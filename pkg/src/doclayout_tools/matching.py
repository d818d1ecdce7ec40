"""IoU and greedy score-ordered matching of detections to ground truth."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import BoundingBox, Detection, GroundTruthInstance
from .errors import MixedImage

TP = "tp"
FP = "fp"
IGNORED = "ignored"
MATCHED = "matched"
MISSED = "missed"


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 when the union is empty."""
    ax1, ay1, ax2, ay2 = a.to_xyxy()
    bx1, by1, bx2, by2 = b.to_xyxy()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return min(1.0, inter / union)


def _xyxy(boxes: Sequence[BoundingBox]) -> np.ndarray:
    if not boxes:
        return np.zeros((0, 4))
    arr = np.array([b.to_list() for b in boxes], dtype=float)
    arr[:, 2] += arr[:, 0]
    arr[:, 3] += arr[:, 1]
    return arr


def iou_matrix(a: Sequence[BoundingBox], b: Sequence[BoundingBox]) -> np.ndarray:
    """Pairwise IoU, shape ``(len(a), len(b))``. Agrees with :func:`iou` elementwise."""
    pa, pb = _xyxy(a), _xyxy(b)
    iw = np.minimum(pa[:, None, 2], pb[None, :, 2]) - np.maximum(pa[:, None, 0], pb[None, :, 0])
    ih = np.minimum(pa[:, None, 3], pb[None, :, 3]) - np.maximum(pa[:, None, 1], pb[None, :, 1])
    positive = (iw > 0) & (ih > 0)
    inter = np.where(positive, iw * ih, 0.0)
    # areas from w*h, not from corner differences, to agree bit-for-bit with iou()
    area_a = np.array([box.area for box in a], dtype=float)
    area_b = np.array([box.area for box in b], dtype=float)
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(positive & (union > 0), inter / np.where(union > 0, union, 1.0), 0.0)
    return np.minimum(out, 1.0)


@dataclass(frozen=True)
class MatchResult:
    """Outcome of matching one image's detections against its ground truth.

    ``detection_outcomes[i]`` is ``"tp"``, ``"fp"`` or ``"ignored"`` for the
    i-th input detection; ``gt_outcomes[j]`` is ``"matched"``, ``"missed"`` or
    ``"ignored"`` (for ignore regions). ``matched_gt[i]`` is the index of the
    ground truth claimed by detection i, or -1.
    """

    detection_outcomes: tuple[str, ...]
    gt_outcomes: tuple[str, ...]
    matched_gt: tuple[int, ...]
    iou_threshold: float

    @property
    def tp(self) -> int:
        return self.detection_outcomes.count(TP)

    @property
    def fp(self) -> int:
        return self.detection_outcomes.count(FP)

    @property
    def ignored(self) -> int:
        return self.detection_outcomes.count(IGNORED)

    @property
    def fn(self) -> int:
        return self.gt_outcomes.count(MISSED)


def _single_image_id(detections, gts):
    ids = {d.image_id for d in detections} | {g.image_id for g in gts}
    if len(ids) > 1:
        raise MixedImage(f"greedy_match expects a single image, got ids {sorted(map(str, ids))}")


def score_order(detections: Sequence[Detection]) -> list[int]:
    """Indices by descending score; equal scores keep input order."""
    return sorted(range(len(detections)), key=lambda i: -detections[i].score)


def greedy_match(
    detections: Sequence[Detection],
    gts: Sequence[GroundTruthInstance],
    iou_thr: float = 0.5,
) -> MatchResult:
    """Match one image's detections to ground truth, COCO style.

    Detections are visited by descending score. Each one looks at the
    same-category ground truth it overlaps with IoU >= ``iou_thr``: unclaimed
    regular instances and any ignore region. The highest-IoU candidate wins
    (regular instances win ties, then lower index). Landing on an ignore region
    marks the detection ignored; ignore regions may absorb any number of
    detections.
    """
    _single_image_id(detections, gts)
    ious = iou_matrix([d.box for d in detections], [g.box for g in gts])
    det_out = [FP] * len(detections)
    matched_gt = [-1] * len(detections)
    gt_out = [IGNORED if g.ignore else MISSED for g in gts]

    for di in score_order(detections):
        det = detections[di]
        best, best_key = -1, None
        for gi, gt in enumerate(gts):
            if gt.category != det.category:
                continue
            if not gt.ignore and gt_out[gi] == MATCHED:
                continue
            overlap = ious[di, gi]
            if overlap < iou_thr:
                continue
            key = (overlap, not gt.ignore)
            if best_key is None or key > best_key:
                best, best_key = gi, key
        if best < 0:
            continue
        matched_gt[di] = best
        if gts[best].ignore:
            det_out[di] = IGNORED
        else:
            det_out[di] = TP
            gt_out[best] = MATCHED

    return MatchResult(tuple(det_out), tuple(gt_out), tuple(matched_gt), float(iou_thr))
