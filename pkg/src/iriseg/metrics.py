"""Segmentation quality metrics over confusion matrices and mask boundaries.

Confusion-based metrics (global/mean accuracy, per-class and mean IoU,
weighted IoU) are computed from pooled pixel tallies.  Boundary F1 matches
boundary pixels between prediction and ground truth within a Euclidean
distance tolerance, using an exact distance transform of each boundary set.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from .distance import boundary_pixels, distance_to_set
from .errors import DataError
from .masks import ConfusionMatrix, as_labels

CSV_COLUMNS = ("GlobalAccuracy", "MeanAccuracy", "MeanIoU", "WeightedIoU", "BoundaryF1")
CSV_HEADER = ",".join(CSV_COLUMNS)


@dataclasses.dataclass(frozen=True)
class BoundarySet:
    """Pixel coordinates lying on a class boundary."""

    coordinates: frozenset

    def __len__(self):
        return len(self.coordinates)


def extract_boundary(mask, class_index: int) -> BoundarySet:
    """Boundary pixels of one class as a coordinate set (row, col)."""
    grid = boundary_pixels(mask, class_index)
    rows, cols = np.nonzero(grid)
    return BoundarySet(frozenset(zip(rows.tolist(), cols.tolist())))


def global_accuracy(cm: ConfusionMatrix) -> float:
    """Correctly classified pixels over all pixels."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return cm.trace / cm.total


def per_class_accuracy(cm: ConfusionMatrix) -> np.ndarray:
    """Fraction of each class's pixels classified correctly; NaN if the class
    has no ground-truth pixels."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    rows = cm.counts.sum(axis=1).astype(np.float64)
    diag = np.diag(cm.counts).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        acc = np.where(rows > 0, diag / rows, np.nan)
    return acc


def mean_accuracy(cm: ConfusionMatrix) -> float:
    """Mean of per-class accuracies over classes present in the ground truth."""
    acc = per_class_accuracy(cm)
    defined = ~np.isnan(acc)
    if not defined.any():
        raise ValueError("no class has ground-truth pixels")
    return float(acc[defined].mean())


def per_class_iou(cm: ConfusionMatrix) -> np.ndarray:
    """Intersection over union per class; NaN when the class is absent from
    both ground truth and prediction (0/0)."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    rows = cm.counts.sum(axis=1).astype(np.float64)
    cols = cm.counts.sum(axis=0).astype(np.float64)
    diag = np.diag(cm.counts).astype(np.float64)
    union = rows + cols - diag
    with np.errstate(invalid="ignore", divide="ignore"):
        iou = np.where(union > 0, diag / union, np.nan)
    return iou


def mean_iou(cm: ConfusionMatrix) -> float:
    """Mean of the defined per-class IoU values."""
    iou = per_class_iou(cm)
    defined = ~np.isnan(iou)
    if not defined.any():
        raise ValueError("no class is present in truth or prediction")
    return float(iou[defined].mean())


def weighted_iou(cm: ConfusionMatrix) -> float:
    """Per-class IoU averaged with weights proportional to ground-truth size."""
    iou = per_class_iou(cm)
    rows = cm.counts.sum(axis=1).astype(np.float64)
    defined = ~np.isnan(iou)
    return float((rows[defined] / cm.total * iou[defined]).sum())


def default_boundary_tolerance(shape: tuple[int, int]) -> float:
    """0.75% of the image diagonal, rounded up to a whole pixel."""
    return float(math.ceil(0.0075 * math.hypot(shape[0], shape[1])))


def boundary_f1(truth, pred, tolerance: float | None = None, num_classes: int | None = None) -> float:
    """Mean boundary F1 over classes.

    Per class, precision is the fraction of predicted-boundary pixels within
    ``tolerance`` of any true-boundary pixel; recall is symmetric.  A class
    with both boundaries empty scores 1; with exactly one empty it scores 0.
    """
    t = as_labels(truth)
    p = as_labels(pred)
    if t.shape != p.shape:
        raise DataError(f"dimension mismatch: truth {t.shape} vs pred {p.shape}")
    if tolerance is None:
        tolerance = default_boundary_tolerance(t.shape)
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    if num_classes is None:
        num_classes = _infer_num_classes(truth, pred)
    scores = []
    for c in range(num_classes):
        tb = boundary_pixels(t, c)
        pb = boundary_pixels(p, c)
        if not tb.any() and not pb.any():
            scores.append(1.0)
            continue
        if not tb.any() or not pb.any():
            scores.append(0.0)
            continue
        dist_to_truth = distance_to_set(tb)
        dist_to_pred = distance_to_set(pb)
        precision = float((dist_to_truth[pb] <= tolerance).mean())
        recall = float((dist_to_pred[tb] <= tolerance).mean())
        if precision + recall == 0.0:
            scores.append(0.0)
        else:
            scores.append(2.0 * precision * recall / (precision + recall))
    return float(np.mean(scores))


def _infer_num_classes(*masks) -> int:
    n = 2
    for m in masks:
        if hasattr(m, "num_classes"):
            n = max(n, m.num_classes)
        else:
            n = max(n, int(np.max(as_labels(m))) + 1)
    return n


@dataclasses.dataclass(frozen=True)
class MetricReport:
    """The five headline metrics (fractions in [0, 1]) plus per-class detail.

    Undefined per-class entries (class absent everywhere) are NaN and are
    excluded from the means.
    """

    global_accuracy: float
    mean_accuracy: float
    mean_iou: float
    weighted_iou: float
    boundary_f1: float
    per_class_iou: tuple[float, ...]
    per_class_accuracy: tuple[float, ...]

    def percentages(self) -> tuple[float, float, float, float, float]:
        return (
            100.0 * self.global_accuracy,
            100.0 * self.mean_accuracy,
            100.0 * self.mean_iou,
            100.0 * self.weighted_iou,
            100.0 * self.boundary_f1,
        )


def report_from_confusion(cm: ConfusionMatrix, bf1: float) -> MetricReport:
    return MetricReport(
        global_accuracy=global_accuracy(cm),
        mean_accuracy=mean_accuracy(cm),
        mean_iou=mean_iou(cm),
        weighted_iou=weighted_iou(cm),
        boundary_f1=bf1,
        per_class_iou=tuple(per_class_iou(cm).tolist()),
        per_class_accuracy=tuple(per_class_accuracy(cm).tolist()),
    )


def image_report(truth, pred, tolerance: float | None = None, num_classes: int | None = None) -> MetricReport:
    """All five metrics for a single truth/prediction pair."""
    if num_classes is None:
        num_classes = _infer_num_classes(truth, pred)
    cm = ConfusionMatrix(num_classes).accumulate(truth, pred)
    return report_from_confusion(cm, boundary_f1(truth, pred, tolerance, num_classes))


def dataset_report(
    pairs,
    tolerance: float | None = None,
    aggregation: str = "pooled",
    num_classes: int | None = None,
) -> MetricReport:
    """Aggregate metrics over a sequence of (truth, pred) mask pairs.

    ``pooled`` computes confusion-based metrics on one dataset-wide tally;
    ``per-image`` averages each metric over images instead.  Boundary F1 is
    always the per-image average.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty input: need at least one (truth, pred) pair")
    if aggregation not in ("pooled", "per-image"):
        raise ValueError(f"unknown aggregation mode {aggregation!r}")
    if num_classes is None:
        num_classes = max(_infer_num_classes(t, p) for t, p in pairs)
    bf1 = float(np.mean([boundary_f1(t, p, tolerance, num_classes) for t, p in pairs]))
    if aggregation == "pooled":
        cm = ConfusionMatrix(num_classes)
        for truth, pred in pairs:
            cm.accumulate(truth, pred)
        return report_from_confusion(cm, bf1)
    reports = [image_report(t, p, tolerance, num_classes) for t, p in pairs]
    per_iou = np.array([r.per_class_iou for r in reports], dtype=np.float64)
    per_acc = np.array([r.per_class_accuracy for r in reports], dtype=np.float64)
    with np.errstate(invalid="ignore"):
        mean_per_iou = np.nanmean(per_iou, axis=0)
        mean_per_acc = np.nanmean(per_acc, axis=0)
    return MetricReport(
        global_accuracy=float(np.mean([r.global_accuracy for r in reports])),
        mean_accuracy=float(np.mean([r.mean_accuracy for r in reports])),
        mean_iou=float(np.mean([r.mean_iou for r in reports])),
        weighted_iou=float(np.mean([r.weighted_iou for r in reports])),
        boundary_f1=bf1,
        per_class_iou=tuple(mean_per_iou.tolist()),
        per_class_accuracy=tuple(mean_per_acc.tolist()),
    )


def render_csv(rows) -> str:
    """CSV with the fixed metric header; one row of percentages per label."""
    lines = ["Label," + CSV_HEADER]
    for label, values in rows:
        lines.append(label + "," + ",".join(f"{v:.2f}" for v in values))
    return "\n".join(lines) + "\n"


def render_table(rows, label_header: str = "Method") -> str:
    """Aligned plain-text table of percentage rows, two decimals."""
    rows = list(rows)
    label_width = max([len(label_header)] + [len(label) for label, _ in rows])
    lines = [label_header.ljust(label_width) + "".join("  " + h for h in CSV_COLUMNS)]
    for label, values in rows:
        cells = "".join("  " + f"{v:.2f}".rjust(len(h)) for h, v in zip(CSV_COLUMNS, values))
        lines.append(label.ljust(label_width) + cells)
    return "\n".join(lines) + "\n"


def render_json(rows) -> str:
    payload = [
        {"label": label, **{col: round(v, 2) for col, v in zip(CSV_COLUMNS, values)}}
        for label, values in rows
    ]
    return json.dumps(payload, indent=2) + "\n"
