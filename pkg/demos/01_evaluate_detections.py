"""
Scoring a detector on the bundled validation pages
==================================================

Load ground truth and detections, compute per-class AP at IoU 0.5, and look
at how the two interpolation schemes differ.
"""

# %%
from doclayout_tools import evaluate, load_detections, load_ground_truth
from doclayout_tools.synthetic import bundled_corpus

corpus = bundled_corpus()
val = load_ground_truth(corpus["val.json"])
dets = load_detections(corpus["val_preds.json"])
print(f"{len(val.images)} pages, {len(val.annotations)} boxes, {len(dets)} detections")

# %%
# 101-point interpolation is the default
report = evaluate(dets, val)
print(report.to_text())

# %%
# The exact area under the envelope is usually within a point or two
exact = evaluate(dets, val, interp="allpoint")
for c, ap in report.ap.items():
    if ap is not None:
        print(f"{c.name:<16} coco101={ap:.4f}  allpoint={exact.ap[c]:.4f}")

# %%
# A stricter overlap requirement costs AP on the jittered boxes
strict = evaluate(dets, val, iou_thr=0.75)
print(f"mAP@0.5  = {100 * report.map50:.2f}")
print(f"mAP@0.75 = {100 * strict.map50:.2f}")
