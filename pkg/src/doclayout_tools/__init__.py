"""Dataset engineering tools for document layout detection.

Covers detection evaluation (AP / mAP at an IoU threshold), per-class
F1-optimal score thresholds, pseudo-label generation for semi-supervised
training, 23-to-9 class taxonomy remapping, instance statistics, SVG box
overlays, and a small feature-distillation loss with its fitters.
"""

__version__ = "0.1.0"

from .core import (
    BoundingBox,
    DatasetSplit,
    Detection,
    GroundTruthInstance,
    ImageRecord,
    LayoutCategory,
    ThresholdTable,
    category_from_id,
    category_from_name,
)
from .errors import *  # noqa: F401,F403
from .annotation_io import (
    load_detections,
    load_ground_truth,
    load_thresholds,
    save_dataset,
    save_detections,
    save_thresholds,
)
from .matching import MatchResult, greedy_match, iou
from .metrics import EvalReport, PrPoint, average_precision, evaluate, f1, pr_curve, prf_at_threshold
from .thresholds import SweepTrace, optimize_all, optimize_class_threshold
from .pseudo import PseudoLabelReport, assign_pseudo_labels, merge_training_set
from .distill import (
    FeatureBatch,
    LinearProjection,
    distill_grad,
    distill_loss,
    fit_projection_closed_form,
    fit_projection_gd,
    lipschitz_constant,
)
from .taxonomy import CategoryHistogram, CoarseCategory, histogram, remap_dataset, to_coarse
from .render import render_page
