"""Brute-force reference implementations used only by the tests.

Nothing here imports the package's matching or metric code. Geometry and
ratios are computed with exact rationals, so comparisons against the
threshold and between candidates are free of rounding.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def exact_iou(a, b) -> Fraction:
    """IoU of two ``(x, y, w, h)`` tuples with rational arithmetic."""
    ax, ay, aw, ah = map(Fraction, a)
    bx, by, bw, bh = map(Fraction, b)
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return Fraction(0)
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else Fraction(0)


def _box(obj):
    b = obj.box
    return (b.x, b.y, b.w, b.h)


def greedy_replay(dets, gts, thr) -> list[str]:
    """Outcome per detection ("tp"/"fp"/"ignored") by literally replaying the greedy rule.

    Handles several images: each image is matched on its own.
    """
    thr = Fraction(thr)
    outcome = ["fp"] * len(dets)
    claimed = set()
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    for i in order:
        d = dets[i]
        best, best_key = None, None
        for j, g in enumerate(gts):
            if g.image_id != d.image_id or int(g.category) != int(d.category):
                continue
            if not g.ignore and j in claimed:
                continue
            ov = exact_iou(_box(d), _box(g))
            if ov < thr:
                continue
            key = (ov, not g.ignore, -j)
            if best_key is None or key > best_key:
                best, best_key = j, key
        if best is None:
            continue
        if gts[best].ignore:
            outcome[i] = "ignored"
        else:
            outcome[i] = "tp"
            claimed.add(best)
    return outcome


def max_bipartite_matching(dets, gts, thr) -> int:
    """Largest number of disjoint same-category (det, gt) pairs with IoU >= thr, by enumeration."""
    thr = Fraction(thr)
    edges = [
        (i, j)
        for i, d in enumerate(dets)
        for j, g in enumerate(gts)
        if not g.ignore
        and g.image_id == d.image_id
        and int(g.category) == int(d.category)
        and exact_iou(_box(d), _box(g)) >= thr
    ]
    for k in range(min(len(dets), len(gts)), 0, -1):
        for subset in itertools.combinations(edges, k):
            if len({e[0] for e in subset}) == k and len({e[1] for e in subset}) == k:
                return k
    return 0


def npos(gts, category) -> int:
    return sum(1 for g in gts if int(g.category) == int(category) and not g.ignore)


def pr_points(dets, gts, category, thr):
    """Exact (recall, precision) after each non-ignored detection of ``category``, in rank order."""
    cat = int(category)
    cd = [d for d in dets if int(d.category) == cat]
    cg = [g for g in gts if int(g.category) == cat]
    outcome = greedy_replay(cd, cg, thr)
    order = sorted(range(len(cd)), key=lambda i: (-cd[i].score, i))
    n = npos(gts, category)
    points, tp, k = [], 0, 0
    for i in order:
        if outcome[i] == "ignored":
            continue
        k += 1
        tp += outcome[i] == "tp"
        points.append((Fraction(tp, n), Fraction(tp, k)))
    return points


def envelope_at(points, r) -> Fraction:
    """max precision over points whose recall reaches ``r`` (0 if none)."""
    candidates = [p for rec, p in points if rec >= r]
    return max(candidates) if candidates else Fraction(0)


def oracle_ap(dets, gts, category, thr=0.5, interp="coco101") -> Fraction:
    points = pr_points(dets, gts, category, thr)
    if interp == "coco101":
        return sum(envelope_at(points, Fraction(i, 100)) for i in range(101)) / 101
    levels = sorted({rec for rec, _ in points if rec > 0})
    total, prev = Fraction(0), Fraction(0)
    for r in levels:
        total += (r - prev) * envelope_at(points, r)
        prev = r
    return total


def oracle_map(dets, gts, thr=0.5, interp="coco101"):
    """(per-class AP dict, mean) over categories having at least one non-ignored GT."""
    cats = sorted({int(g.category) for g in gts if not g.ignore})
    aps = {c: oracle_ap(dets, gts, c, thr, interp) for c in cats}
    return aps, (sum(aps.values()) / len(aps) if aps else None)


def oracle_f1(dets, gts, category, score_thr, iou_thr=0.5) -> Fraction:
    """Exact F1 keeping detections with score > score_thr."""
    cat = int(category)
    kept = [d for d in dets if int(d.category) == cat and d.score > score_thr]
    cg = [g for g in gts if int(g.category) == cat]
    outcome = greedy_replay(kept, cg, iou_thr)
    tp, fp = outcome.count("tp"), outcome.count("fp")
    fn = npos(gts, category) - tp
    if tp == 0:
        return Fraction(0)
    return Fraction(2 * tp, 2 * tp + fp + fn)


def numeric_grad(fn, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of scalar ``fn`` at ``x``."""
    g = np.zeros_like(x, dtype=float)
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (fn(xp) - fn(xm)) / (2 * h)
    return g
