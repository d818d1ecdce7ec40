"""Coarse remapping of the 23-class taxonomy and per-class instance statistics."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from pathlib import Path

from .annotation_io import image_to_json, write_json
from .core import BoundingBox, DatasetSplit, ImageId, ImageRecord, LayoutCategory, as_category
from .errors import IoError

C = LayoutCategory

DISPLAY_NAMES = {
    C.paragraph_title: "Paragraph Title",
    C.image: "Image",
    C.text: "Text",
    C.number: "Page Number",
    C.abstract: "Abstract",
    C.content: "Content",
    C.figure_title: "Image Caption",
    C.formula: "Formula",
    C.table: "Table",
    C.table_title: "Table Caption",
    C.reference: "Reference",
    C.doc_title: "Document Title",
    C.footnote: "Footnote",
    C.header: "Header",
    C.algorithm: "Algorithm",
    C.footer: "Footer",
    C.seal: "Seal",
    C.chart_title: "Chart Caption",
    C.chart: "Chart",
    C.formula_number: "Formula Number",
    C.header_image: "Header Image",
    C.footer_image: "Footer Image",
    C.aside_text: "Aside Text",
}


class CoarseCategory(enum.Enum):
    """The 9-class DocLayout-YOLO scheme; values are the display strings."""

    title = "Title"
    plain_text = "Plain Text"
    abandon = "Abandon"
    isolate_formula = "Isolate Formula"
    formula_number = "Formula Number"
    figure = "Figure"
    figure_caption = "Figure Caption"
    table = "Table"
    table_caption = "Table Caption"

    @property
    def id(self) -> int:
        return list(CoarseCategory).index(self)

    @property
    def display(self) -> str:
        return self.value


K = CoarseCategory

COARSE_OF = {
    C.doc_title: K.title,
    C.paragraph_title: K.title,
    C.text: K.plain_text,
    C.number: K.abandon,
    C.abstract: K.plain_text,
    C.content: K.plain_text,
    C.reference: K.plain_text,
    C.footnote: K.abandon,
    C.header: K.abandon,
    C.footer: K.abandon,
    C.algorithm: K.plain_text,
    C.formula: K.isolate_formula,
    C.formula_number: K.formula_number,
    C.image: K.figure,
    C.figure_title: K.figure_caption,
    C.table: K.table,
    C.table_title: K.table_caption,
    C.chart: K.figure,
    C.chart_title: K.figure_caption,
    C.seal: K.figure,
    C.header_image: K.abandon,
    C.footer_image: K.abandon,
    C.aside_text: K.abandon,
}


def to_coarse(category: LayoutCategory) -> CoarseCategory:
    return COARSE_OF[LayoutCategory(category)]


@dataclass(frozen=True)
class CoarseInstance:
    image_id: ImageId
    category: CoarseCategory
    box: BoundingBox
    ignore: bool = False
    source: str = "human"


@dataclass(frozen=True)
class CoarseSplit:
    images: tuple[ImageRecord, ...]
    annotations: tuple[CoarseInstance, ...]
    label: str = "labeled"

    def to_json(self) -> dict:
        annotations = []
        for i, a in enumerate(self.annotations, start=1):
            record = {
                "id": i,
                "image_id": a.image_id,
                "category_id": a.category.id,
                "bbox": a.box.to_list(),
                "area": a.box.area,
                "iscrowd": int(a.ignore),
            }
            if a.source == "pseudo":
                record["source"] = "pseudo"
            annotations.append(record)
        return {
            "info": {"split": self.label, "taxonomy": "coarse"},
            "images": [image_to_json(img) for img in self.images],
            "annotations": annotations,
            "categories": [{"id": k.id, "name": k.display} for k in CoarseCategory],
        }

    def save(self, path) -> None:
        write_json(self.to_json(), path)


def remap_dataset(split: DatasetSplit) -> CoarseSplit:
    """Replace every annotation's category by its coarse class; geometry is untouched."""
    return CoarseSplit(
        split.images,
        tuple(CoarseInstance(a.image_id, to_coarse(a.category), a.box, a.ignore, a.source) for a in split.annotations),
        split.label,
    )


@dataclass(frozen=True)
class CategoryHistogram:
    """Instance counts per category, in id order."""

    counts: tuple[int, ...]
    split: str = "training"

    def __post_init__(self):
        if self.split not in ("training", "validation"):
            raise ValueError(f"histogram split must be 'training' or 'validation', got {self.split!r}")
        counts = tuple(int(c) for c in self.counts)
        if len(counts) != len(LayoutCategory) or min(counts) < 0:
            raise ValueError("histogram needs 23 non-negative counts")
        object.__setattr__(self, "counts", counts)

    def __getitem__(self, category) -> int:
        return self.counts[as_category(category)]

    def __add__(self, other: "CategoryHistogram") -> "CategoryHistogram":
        return CategoryHistogram(tuple(a + b for a, b in zip(self.counts, other.counts)), self.split)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_dict(self) -> dict[str, int]:
        return {c.name: n for c, n in zip(LayoutCategory, self.counts)}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["category", "id", "count"])
        for c, n in zip(LayoutCategory, self.counts):
            writer.writerow([c.name, int(c), n])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        try:
            Path(path).write_text(self.to_csv(), encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc


def _histogram_split(label: str) -> str:
    return "validation" if label == "validation" else "training"


def histogram(split: DatasetSplit, which: str | None = None) -> CategoryHistogram:
    """Count every annotation (ignore regions and pseudo-labels included) per category."""
    counts = [0] * len(LayoutCategory)
    for a in split.annotations:
        counts[a.category] += 1
    return CategoryHistogram(tuple(counts), which or _histogram_split(split.label))

