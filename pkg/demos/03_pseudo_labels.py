"""
Pseudo-labels for unlabeled pages
=================================

Teacher detections on unlabeled pages become training annotations when they
clear their class threshold. The result is merged with the labeled pages and
a few pages are drawn as SVG for a visual check.
"""

# %%
import tempfile
from pathlib import Path

from doclayout_tools import (
    assign_pseudo_labels,
    load_detections,
    load_ground_truth,
    merge_training_set,
    optimize_all,
    render_page,
    save_dataset,
)
from doclayout_tools.synthetic import bundled_corpus

corpus = bundled_corpus()
table = optimize_all(load_detections(corpus["val_preds.json"]), load_ground_truth(corpus["val.json"]))

# %%
unlabeled = load_ground_truth(corpus["unlabeled.json"])
teacher = load_detections(corpus["unlabeled_preds.json"])
pseudo, report = assign_pseudo_labels(teacher, table)
print(report.to_text())

# %%
labeled = load_ground_truth(corpus["train.json"])
merged = merge_training_set(labeled, unlabeled, pseudo)
print(f"{len(labeled.annotations)} real + {len(pseudo)} pseudo = {len(merged.annotations)} annotations")

out = Path(tempfile.mkdtemp(prefix="pseudo_demo_"))
save_dataset(merged, out / "merged.json")

# %%
# Kept pseudo-labels vs everything the teacher proposed on the first unlabeled page
page = unlabeled.images[0]
(out / "kept.svg").write_text(render_page(page, merged.annotations_for(page.id)))
(out / "all.svg").write_text(render_page(page, [d for d in teacher if d.image_id == page.id]))
print(f"wrote merged.json, kept.svg and all.svg to {out}")
