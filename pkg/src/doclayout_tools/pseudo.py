"""Promote teacher detections on unlabeled pages to pseudo-annotations."""

from __future__ import annotations

import dataclasses
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import (
    DatasetSplit,
    Detection,
    GroundTruthInstance,
    ImageRecord,
    LayoutCategory,
    ThresholdTable,
    clamp_box,
)
from .errors import DanglingReference, IdCollision
from .matching import iou_matrix, score_order

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PseudoLabelReport:
    kept: dict
    dropped: dict
    total_images: int

    @property
    def total_kept(self) -> int:
        return sum(self.kept.values())

    def to_json(self) -> dict:
        return {
            "total_images": self.total_images,
            "total_kept": self.total_kept,
            "total_dropped": sum(self.dropped.values()),
            "classes": [
                {"id": int(c), "name": c.name, "kept": self.kept[c], "dropped": self.dropped[c]}
                for c in LayoutCategory
            ],
        }

    def to_text(self) -> str:
        lines = [f"{'id':>3}  {'category':<16}{'kept':>8}{'dropped':>9}"]
        for c in LayoutCategory:
            lines.append(f"{int(c):>3}  {c.name:<16}{self.kept[c]:>8}{self.dropped[c]:>9}")
        lines.append(f"images: {self.total_images}  kept: {self.total_kept}  dropped: {sum(self.dropped.values())}")
        return "\n".join(lines)


def classwise_nms(detections: Sequence[Detection], iou_thr: float = 0.5) -> list[bool]:
    """Per image and class, suppress any detection overlapping a higher-scored one at IoU >= ``iou_thr``.

    Returns a survival mask aligned with the input.
    """
    groups = defaultdict(list)
    for i, d in enumerate(detections):
        groups[(d.image_id, d.category)].append(i)
    alive = [True] * len(detections)
    for idx in groups.values():
        group = [detections[i] for i in idx]
        ious = iou_matrix([d.box for d in group], [d.box for d in group])
        kept: list[int] = []
        for j in score_order(group):
            if any(ious[j, k] >= iou_thr for k in kept):
                alive[idx[j]] = False
            else:
                kept.append(j)
    return alive


def assign_pseudo_labels(
    detections: Sequence[Detection],
    thresholds: ThresholdTable,
    nms_iou: float | None = None,
) -> tuple[list[GroundTruthInstance], PseudoLabelReport]:
    """Keep each detection whose score is strictly above its class threshold.

    Kept detections become non-ignore annotations tagged ``source="pseudo"``;
    their scores are discarded. ``nms_iou`` enables class-wise NMS before
    filtering (suppressed detections count as dropped); leave it None for
    NMS-free teachers.
    """
    alive = classwise_nms(detections, nms_iou) if nms_iou is not None else [True] * len(detections)
    kept = {c: 0 for c in LayoutCategory}
    dropped = {c: 0 for c in LayoutCategory}
    labels = []
    for det, ok in zip(detections, alive):
        if ok and det.score > thresholds[det.category]:
            kept[det.category] += 1
            labels.append(GroundTruthInstance(det.image_id, det.category, det.box, ignore=False, source="pseudo"))
        else:
            dropped[det.category] += 1
    report = PseudoLabelReport(kept, dropped, len({d.image_id for d in detections}))
    return labels, report


def merge_training_set(
    labeled: DatasetSplit,
    unlabeled_images: Iterable[ImageRecord] | DatasetSplit,
    pseudo: Sequence[GroundTruthInstance],
) -> DatasetSplit:
    """Combine real labels with pseudo-labels on disjoint unlabeled images.

    Pseudo boxes overhanging their page are clamped with a warning. The result
    is a ``labeled`` split; pseudo annotations keep ``source="pseudo"``.
    """
    if isinstance(unlabeled_images, DatasetSplit):
        unlabeled_images = unlabeled_images.images
    unlabeled_images = tuple(unlabeled_images)
    labeled_ids = {img.id for img in labeled.images}
    clash = sorted((str(img.id) for img in unlabeled_images if img.id in labeled_ids))
    if clash:
        raise IdCollision(f"image ids present in both labeled and unlabeled sets: {clash[:10]}")
    by_id = {img.id: img for img in unlabeled_images}
    merged_pseudo = []
    clamped = 0
    for ann in pseudo:
        img = by_id.get(ann.image_id)
        if img is None:
            raise DanglingReference(f"pseudo-label refers to image {ann.image_id!r} not in the unlabeled set")
        box, changed = clamp_box(ann.box, img.width, img.height)
        clamped += changed
        merged_pseudo.append(dataclasses.replace(ann, box=box, ignore=False, source="pseudo"))
    if clamped:
        logger.warning("clamped %d pseudo-label box(es) to image bounds", clamped)
    return DatasetSplit(
        labeled.images + unlabeled_images,
        labeled.annotations + tuple(merged_pseudo),
        "labeled",
    )
