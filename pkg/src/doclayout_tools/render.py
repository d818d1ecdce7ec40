"""Standalone SVG overlays of annotation or detection boxes on a blank page frame."""

from __future__ import annotations

import re
from typing import Mapping, Sequence, Union
from xml.sax.saxutils import escape, quoteattr

from .core import Detection, GroundTruthInstance, ImageRecord, LayoutCategory
from .errors import WrongImage

# One fixed color per category id; chosen for mutual contrast on white.
PALETTE = (
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4",
    "#f032e6", "#bfef45", "#469990", "#9a6324", "#800000", "#000075",
    "#808000", "#ffe119", "#a9a9a9", "#aaffc3", "#dcbeff", "#fabed4",
    "#ffd8b1", "#fffac8", "#00b3b3", "#b30059", "#5c5c00",
)

_HEX = re.compile(r"^#[0-9a-fA-F]{6}$")

StyleMap = Mapping[LayoutCategory, tuple[str, bool]]
DEFAULT_STYLE: StyleMap = {c: (PALETTE[c], True) for c in LayoutCategory}


def validate_style(style: StyleMap) -> None:
    missing = [c.name for c in LayoutCategory if c not in style]
    if missing:
        raise ValueError(f"style map is missing categories: {missing}")
    for c, (color, _) in style.items():
        if not _HEX.match(color):
            raise ValueError(f"style color for {LayoutCategory(c).name} is not a 6-digit hex color: {color!r}")


def _num(value: float) -> str:
    value = float(value)
    return str(int(value)) if value.is_integer() else repr(value)


Item = Union[GroundTruthInstance, Detection]


def render_page(
    image: ImageRecord,
    items: Sequence[Item],
    style: StyleMap = DEFAULT_STYLE,
    href: str | None = None,
) -> str:
    """Render one page as an SVG 1.1 document.

    The page frame is the first ``rect``; each box follows as its own ``rect``
    at the exact page coordinates, with a label of the category name and, for
    detections, the score to two decimals. ``href`` optionally references an
    external page image drawn underneath.
    """
    validate_style(style)
    for item in items:
        if item.image_id != image.id:
            raise WrongImage(f"item for image {item.image_id!r} passed to page {image.id!r}")
    w, h = _num(image.width), _num(image.height)
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" '
        f'version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f"<title>{escape(str(image.id))}</title>",
    ]
    if href is not None:
        out.append(f'<image x="0" y="0" width="{w}" height="{h}" xlink:href={quoteattr(href)}/>')
    out.append(f'<rect class="page" x="0" y="0" width="{w}" height="{h}" fill="none" stroke="#000000" stroke-width="1"/>')
    for item in items:
        color, show_label = style[item.category]
        b = item.box
        dash = ' stroke-dasharray="4 2"' if getattr(item, "ignore", False) else ""
        out.append(
            f'<rect class="box {item.category.name}" x="{_num(b.x)}" y="{_num(b.y)}" '
            f'width="{_num(b.w)}" height="{_num(b.h)}" fill="none" stroke="{color}" stroke-width="2"{dash}/>'
        )
        if show_label:
            label = item.category.name
            if isinstance(item, Detection):
                label += f" {item.score:.2f}"
            out.append(
                f'<text x="{_num(b.x)}" y="{_num(max(b.y - 2, 10))}" font-family="sans-serif" '
                f'font-size="10" fill="{color}">{escape(label)}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
