"""Confusion matrices, per-class IoU, mean IoU, and frequency-weighted IoU.

Matrices are mergeable monoids: per-image tallies add elementwise, so a
corpus can be evaluated in parallel and reduced. Pixels where either mask
is the ignore value are excluded from every tally.

IoU_i = n_ii / (t_i + sum_j n_ji - n_ii) with t_i the ground-truth pixel
count of class i. Mean IoU averages over classes with a nonzero
denominator; fwIoU weights each class IoU by t_i / sum_k t_k. A literal
variant of fwIoU that keeps a leading 1/n_cl factor is reported for
comparison with older write-ups that include it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core.types import IGNORE, LabelMask
from .errors import DimensionMismatch, InvariantViolation, NoPixels, NoScorableClass


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Square pixel tally; row = ground-truth class, column = prediction.

    Index 0 is background; n_cl_total includes it. `ignored` counts pixels
    excluded because ground truth or prediction carried the ignore value.
    """

    counts: np.ndarray  # (n_cl_total, n_cl_total) int64
    ignored: int = 0
    include_background: bool = True

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or counts.shape[0] < 1:
            raise InvariantViolation(f"confusion matrix must be square, got {counts.shape}")
        if (counts < 0).any() or self.ignored < 0:
            raise InvariantViolation("confusion matrix counts must be non-negative")
        counts = np.ascontiguousarray(counts)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def n_cl_total(self) -> int:
        return self.counts.shape[0]

    @property
    def gt_totals(self) -> np.ndarray:
        """t_i: ground-truth pixel count per class (row sums)."""
        return self.counts.sum(axis=1)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        if other.n_cl_total != self.n_cl_total:
            raise DimensionMismatch("cannot add confusion matrices of different sizes")
        if other.include_background != self.include_background:
            raise InvariantViolation("cannot add matrices with different background settings")
        return ConfusionMatrix(
            counts=self.counts + other.counts,
            ignored=self.ignored + other.ignored,
            include_background=self.include_background,
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return (
            self.ignored == other.ignored
            and self.include_background == other.include_background
            and np.array_equal(self.counts, other.counts)
        )

    def scored_classes(self) -> list[int]:
        """Class indices with nonzero IoU denominator, honoring include_background."""
        start = 0 if self.include_background else 1
        denom = self.gt_totals + self.counts.sum(axis=0) - np.diag(self.counts)
        return [i for i in range(start, self.n_cl_total) if denom[i] > 0]

    def excluded_classes(self) -> list[int]:
        start = 0 if self.include_background else 1
        scored = set(self.scored_classes())
        return [i for i in range(start, self.n_cl_total) if i not in scored]


def confusion_matrix(
    pred: LabelMask,
    gt: LabelMask,
    n_cl_total: int,
    include_background: bool = True,
) -> ConfusionMatrix:
    """Tally one image. n_cl_total = class count including background."""
    if pred.data.shape != gt.data.shape:
        raise DimensionMismatch(
            f"prediction {pred.width}x{pred.height} vs ground truth {gt.width}x{gt.height}"
        )
    p = pred.data.ravel()
    g = gt.data.ravel()
    keep = (p != IGNORE) & (g != IGNORE)
    if (p[keep] >= n_cl_total).any() or (g[keep] >= n_cl_total).any():
        raise InvariantViolation(f"mask values exceed class count {n_cl_total - 1}")
    flat = g[keep].astype(np.int64) * n_cl_total + p[keep]
    counts = np.bincount(flat, minlength=n_cl_total * n_cl_total).reshape(
        n_cl_total, n_cl_total
    )
    return ConfusionMatrix(
        counts=counts,
        ignored=int((~keep).sum()),
        include_background=include_background,
    )


def per_class_iou(cm: ConfusionMatrix) -> dict[int, float]:
    """IoU per scorable class (nonzero denominator)."""
    diag = np.diag(cm.counts)
    denom = cm.gt_totals + cm.counts.sum(axis=0) - diag
    return {i: float(diag[i]) / float(denom[i]) for i in cm.scored_classes()}


def mean_iou(cm: ConfusionMatrix) -> float:
    ious = per_class_iou(cm)
    if not ious:
        raise NoScorableClass("every class has a zero IoU denominator")
    return float(np.mean(list(ious.values())))


def fw_iou(cm: ConfusionMatrix, literal_paper_formula: bool = False) -> float:
    """Frequency-weighted IoU: sum_i (t_i / sum_k t_k) * IoU_i.

    literal_paper_formula keeps an extra leading 1 / n_scored factor.
    """
    start = 0 if cm.include_background else 1
    totals = cm.gt_totals[start:]
    total_pixels = int(totals.sum())
    if total_pixels == 0:
        raise NoPixels("no pixels to weight (all ignored or empty)")
    ious = per_class_iou(cm)
    value = sum(float(cm.gt_totals[i]) / total_pixels * iou for i, iou in ious.items())
    if literal_paper_formula:
        if not ious:
            raise NoScorableClass("every class has a zero IoU denominator")
        value /= len(ious)
    return float(value)


def metrics_doc(cm: ConfusionMatrix, class_names: tuple[str, ...] | None = None) -> dict:
    """JSON-ready metrics report for one aggregated matrix."""
    names = class_names or tuple(str(i) for i in range(cm.n_cl_total))
    ious = per_class_iou(cm)
    return {
        "include_background": cm.include_background,
        "pixels_evaluated": int(cm.counts.sum()),
        "pixels_ignored": cm.ignored,
        "per_class_iou": {names[i]: iou for i, iou in sorted(ious.items())},
        "excluded_classes": [names[i] for i in cm.excluded_classes()],
        "mean_iou": mean_iou(cm),
        "fw_iou": fw_iou(cm),
        "fw_iou_literal": fw_iou(cm, literal_paper_formula=True),
    }
