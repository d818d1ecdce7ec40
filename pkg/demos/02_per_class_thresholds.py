"""
Per-class score thresholds
==========================

For each class, sweep every score at which the kept set changes and keep the
cutoff with the best F1. Classes absent from the validation pages fall back
to a fixed value.
"""

# %%
from doclayout_tools import load_detections, load_ground_truth, optimize_all, optimize_class_threshold
from doclayout_tools.synthetic import bundled_corpus

corpus = bundled_corpus()
val = load_ground_truth(corpus["val.json"], label="validation")
dets = load_detections(corpus["val_preds.json"])

# %%
# One class in detail: every candidate threshold and its F1
trace = optimize_class_threshold(dets, val, "text")
for thr, point, f1 in trace.candidates:
    mark = "  <- chosen" if thr == trace.chosen else ""
    print(f"{thr:.4f}  P={point.precision:.3f} R={point.recall:.3f} F1={f1:.3f}{mark}")

# %%
# All 23 classes at once
table = optimize_all(dets, val, fallback=0.5)
for c, value in table.as_dict().items():
    tag = " (fallback)" if c in {k.name for k in table.fallback_classes} else ""
    print(f"{c:<16} {value:.4f}{tag}")
print(table.provenance)
