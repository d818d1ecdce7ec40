"""Shared domain vocabulary: categories, boxes, detections, annotations, splits."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Union

from .errors import DanglingReference, RangeError, SchemaError, ScoreRange, UnknownCategory

ImageId = Union[int, str]

NUM_CATEGORIES = 23
SPLIT_LABELS = ("labeled", "unlabeled", "validation")
SOURCES = ("human", "pseudo")


class LayoutCategory(enum.IntEnum):
    """The 23 fine-grained layout classes with their stable integer ids."""

    paragraph_title = 0
    image = 1
    text = 2
    number = 3
    abstract = 4
    content = 5
    figure_title = 6
    formula = 7
    table = 8
    table_title = 9
    reference = 10
    doc_title = 11
    footnote = 12
    header = 13
    algorithm = 14
    footer = 15
    seal = 16
    chart_title = 17
    chart = 18
    formula_number = 19
    header_image = 20
    footer_image = 21
    aside_text = 22

    def __str__(self) -> str:
        return self.name


def category_from_id(category_id: int) -> LayoutCategory:
    if isinstance(category_id, bool) or not isinstance(category_id, int):
        raise UnknownCategory(f"category id must be an integer, got {category_id!r}")
    try:
        return LayoutCategory(category_id)
    except ValueError:
        raise UnknownCategory(f"no layout category with id {category_id}") from None


def category_from_name(name: str) -> LayoutCategory:
    """Case-insensitive lookup of a canonical snake_case category name."""
    if not isinstance(name, str):
        raise UnknownCategory(f"category name must be a string, got {name!r}")
    try:
        return LayoutCategory[name.strip().lower()]
    except KeyError:
        raise UnknownCategory(f"unknown layout category {name!r}") from None


def as_category(value: LayoutCategory | int | str) -> LayoutCategory:
    if isinstance(value, LayoutCategory):
        return value
    if isinstance(value, str):
        return category_from_name(value)
    return category_from_id(value)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in COCO ``[x, y, w, h]`` pixels, top-left origin."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"box coordinate {name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise SchemaError(f"box coordinate {name} is not finite: {value!r}")
            object.__setattr__(self, name, float(value))
        if self.w < 0 or self.h < 0:
            raise SchemaError(f"box has negative extent: w={self.w}, h={self.h}")

    @classmethod
    def from_xyxy(cls, x1: float, y1: float, x2: float, y2: float) -> "BoundingBox":
        return cls(x1, y1, x2 - x1, y2 - y1)

    def to_xyxy(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.x + self.w, self.y + self.h)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def degenerate(self) -> bool:
        return self.w == 0 or self.h == 0


def clamp_box(box: BoundingBox, width: float, height: float) -> tuple[BoundingBox, bool]:
    """Clip ``box`` to the image rectangle.

    Returns the clipped box and whether clipping changed it. A box that does
    not overlap the image at all raises :class:`SchemaError`; a degenerate box
    lying inside the image is returned unchanged.
    """
    x1, y1, x2, y2 = box.to_xyxy()
    cx1, cy1 = max(x1, 0.0), max(y1, 0.0)
    cx2, cy2 = min(x2, float(width)), min(y2, float(height))
    outside = (
        cx2 < cx1
        or cy2 < cy1
        or (box.w > 0 and cx2 == cx1)
        or (box.h > 0 and cy2 == cy1)
    )
    if outside:
        raise SchemaError(f"box {box.to_list()} lies entirely outside the {width}x{height} image")
    if (cx1, cy1, cx2, cy2) == (x1, y1, x2, y2):
        return box, False
    return BoundingBox.from_xyxy(cx1, cy1, cx2, cy2), True


def _check_image_id(image_id) -> None:
    if isinstance(image_id, bool) or not isinstance(image_id, (int, str)):
        raise SchemaError(f"image id must be an int or str, got {image_id!r}")


@dataclass(frozen=True)
class Detection:
    """One scored, categorized box emitted by a detector for one image."""

    image_id: ImageId
    category: LayoutCategory
    box: BoundingBox
    score: float

    def __post_init__(self):
        _check_image_id(self.image_id)
        object.__setattr__(self, "category", as_category(self.category))
        s = self.score
        if isinstance(s, bool) or not isinstance(s, (int, float)) or not 0.0 <= s <= 1.0:
            raise ScoreRange(f"detection score must lie in [0, 1], got {s!r}")
        object.__setattr__(self, "score", float(s))


@dataclass(frozen=True)
class GroundTruthInstance:
    """An annotated region.

    ``ignore`` marks crowd/ignore regions excluded from matching. ``source``
    distinguishes human labels from pseudo-labels promoted from detections.
    """

    image_id: ImageId
    category: LayoutCategory
    box: BoundingBox
    ignore: bool = False
    source: str = "human"

    def __post_init__(self):
        _check_image_id(self.image_id)
        object.__setattr__(self, "category", as_category(self.category))
        object.__setattr__(self, "ignore", bool(self.ignore))
        if self.source not in SOURCES:
            raise SchemaError(f"annotation source must be one of {SOURCES}, got {self.source!r}")

    @property
    def is_pseudo(self) -> bool:
        return self.source == "pseudo"


@dataclass(frozen=True)
class ImageRecord:
    id: ImageId
    width: float
    height: float
    file_name: str = ""

    def __post_init__(self):
        _check_image_id(self.id)
        for name in ("width", "height"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
                raise SchemaError(f"image {self.id!r}: {name} must be a positive number, got {value!r}")


@dataclass(frozen=True)
class DatasetSplit:
    """Images plus their annotations, tagged as labeled, unlabeled or validation data."""

    images: tuple[ImageRecord, ...]
    annotations: tuple[GroundTruthInstance, ...]
    label: str = "labeled"

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "annotations", tuple(self.annotations))
        if self.label not in SPLIT_LABELS:
            raise SchemaError(f"split label must be one of {SPLIT_LABELS}, got {self.label!r}")
        by_id: dict = {}
        for img in self.images:
            if img.id in by_id:
                raise SchemaError(f"duplicate image id {img.id!r}")
            by_id[img.id] = img
        for ann in self.annotations:
            img = by_id.get(ann.image_id)
            if img is None:
                raise DanglingReference(f"annotation refers to missing image {ann.image_id!r}")
            x1, y1, x2, y2 = ann.box.to_xyxy()
            if x1 < 0 or y1 < 0 or x2 > img.width or y2 > img.height:
                raise SchemaError(
                    f"annotation box {ann.box.to_list()} exceeds image {img.id!r} "
                    f"({img.width}x{img.height}); clamp it first"
                )

    @cached_property
    def image_index(self) -> dict[ImageId, ImageRecord]:
        return {img.id: img for img in self.images}

    def annotations_for(self, image_id: ImageId) -> list[GroundTruthInstance]:
        return [a for a in self.annotations if a.image_id == image_id]

    def __len__(self) -> int:
        return len(self.images)


@dataclass(frozen=True)
class ThresholdTable:
    """Per-class score cutoffs, one per layout category, indexed by category id.

    Equality compares the cutoffs only; ``provenance`` and ``fallback_classes``
    describe how the table was produced.
    """

    values: tuple[float, ...]
    provenance: str = field(default="", compare=False)
    fallback_classes: tuple[LayoutCategory, ...] = field(default=(), compare=False)

    def __post_init__(self):
        values = tuple(self.values)
        if len(values) != NUM_CATEGORIES:
            raise SchemaError(f"threshold table needs {NUM_CATEGORIES} entries, got {len(values)}")
        for cat, v in zip(LayoutCategory, values):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
                raise RangeError(f"threshold for {cat.name} must lie in [0, 1], got {v!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        object.__setattr__(self, "fallback_classes", tuple(as_category(c) for c in self.fallback_classes))

    @classmethod
    def from_mapping(
        cls,
        entries: Mapping[LayoutCategory | int | str, float],
        provenance: str = "",
        fallback_classes: Iterable = (),
    ) -> "ThresholdTable":
        resolved = {as_category(k): v for k, v in entries.items()}
        missing = [c.name for c in LayoutCategory if c not in resolved]
        if missing or len(resolved) != len(entries):
            raise SchemaError(f"threshold table is missing categories: {missing}")
        return cls(tuple(resolved[c] for c in LayoutCategory), provenance, tuple(fallback_classes))

    @classmethod
    def constant(cls, value: float, provenance: str = "") -> "ThresholdTable":
        return cls((value,) * NUM_CATEGORIES, provenance)

    def __getitem__(self, category: LayoutCategory | int | str) -> float:
        return self.values[as_category(category)]

    def replace(self, category: LayoutCategory | int | str, value: float) -> "ThresholdTable":
        values = list(self.values)
        values[as_category(category)] = value
        return ThresholdTable(tuple(values), self.provenance, self.fallback_classes)

    def as_dict(self) -> dict[str, float]:
        return {c.name: v for c, v in zip(LayoutCategory, self.values)}
