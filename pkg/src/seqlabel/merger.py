"""Merging the per-sequence manual annotation with CAM pseudo labels.

The merged label starts as a copy of the manual annotation; a pixel is
taken from the CAM label only where the CAM assigns a class and the
annotation says background. Manual class pixels are never overwritten,
so the merge is gap-filling only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core.types import IGNORE, LabelMask
from .errors import AnnotationHasIgnorePixels, DimensionMismatch
from .sequencer.sequences import Sequence


@dataclass(frozen=True)
class MergeReport:
    """Per-pixel provenance counts for one merged mask."""

    pixels_from_sequence: int
    pixels_from_cam: int
    ignored_pixels: int
    per_class_added: dict[int, int] = field(default_factory=dict)

    def to_doc(self) -> dict:
        return {
            "pixels_from_sequence": self.pixels_from_sequence,
            "pixels_from_cam": self.pixels_from_cam,
            "ignored_pixels": self.ignored_pixels,
            "per_class_added": {str(k): v for k, v in sorted(self.per_class_added.items())},
        }


def merge_labels(
    y_s: LabelMask,
    y_p: LabelMask,
    *,
    strict_class_set: bool = False,
    propagate_ignore: bool = False,
) -> tuple[LabelMask, MergeReport]:
    """Merge a manual annotation with a CAM pseudo label.

    y_s must be ignore-free (manual annotations are total). A pixel takes
    the CAM value where the CAM is class-assigned and y_s is background;
    everywhere else y_s wins. CAM ignore pixels never overwrite unless
    propagate_ignore is set (then an ignore over annotation background
    stays ignored). strict_class_set additionally requires the CAM class
    to be absent from the annotation's class inventory.
    """
    if y_s.data.shape != y_p.data.shape:
        raise DimensionMismatch(
            f"annotation {y_s.width}x{y_s.height} vs CAM label {y_p.width}x{y_p.height}"
        )
    if (y_s.data == IGNORE).any():
        raise AnnotationHasIgnorePixels("manual annotation must not contain ignore pixels")

    cam_assigned = (y_p.data != 0) & (y_p.data != IGNORE)
    overwrite = cam_assigned & (y_s.data == 0)
    if strict_class_set:
        annotated_classes = np.unique(y_s.data[y_s.data != 0])
        overwrite &= ~np.isin(y_p.data, annotated_classes)

    out = y_s.data.copy()
    out[overwrite] = y_p.data[overwrite]

    from_cam = int(overwrite.sum())
    if propagate_ignore and not strict_class_set:
        ignore_fill = (y_p.data == IGNORE) & (y_s.data == 0)
        out[ignore_fill] = IGNORE
        from_cam += int(ignore_fill.sum())

    added_values, added_counts = np.unique(y_p.data[overwrite], return_counts=True)
    report = MergeReport(
        pixels_from_sequence=out.size - from_cam,
        pixels_from_cam=from_cam,
        ignored_pixels=int((y_p.data == IGNORE).sum()),
        per_class_added={int(v): int(c) for v, c in zip(added_values, added_counts)},
    )
    return LabelMask(out), report


def _annotation_only_report(annotation: LabelMask) -> MergeReport:
    return MergeReport(
        pixels_from_sequence=annotation.data.size,
        pixels_from_cam=0,
        ignored_pixels=0,
        per_class_added={},
    )


@dataclass(frozen=True)
class PropagationResult:
    """Per-image outcome of propagating one annotation across a sequence."""

    outputs: dict[str, LabelMask]
    reports: dict[str, MergeReport]
    warnings: tuple[str, ...] = ()
    errors: dict[str, str] = field(default_factory=dict)


def propagate_sequence(
    sequence: Sequence,
    annotation: LabelMask,
    cam_labels: Mapping[str, LabelMask],
    *,
    strict_class_set: bool = False,
    propagate_ignore: bool = False,
) -> PropagationResult:
    """Produce merged labels for every member of a sequence.

    The representative receives the annotation unchanged. Members without
    a CAM label fall back to the annotation verbatim (with a warning);
    dimension mismatches are collected per image instead of failing the
    whole sequence.
    """
    outputs: dict[str, LabelMask] = {}
    reports: dict[str, MergeReport] = {}
    warnings: list[str] = []
    errors: dict[str, str] = {}

    for image_id in sequence.image_ids:
        if image_id == sequence.representative_id:
            outputs[image_id] = annotation
            reports[image_id] = _annotation_only_report(annotation)
            continue
        cam = cam_labels.get(image_id)
        if cam is None:
            outputs[image_id] = annotation
            reports[image_id] = _annotation_only_report(annotation)
            warnings.append(f"{image_id}: no CAM label, annotation used verbatim")
            continue
        try:
            merged, report = merge_labels(
                annotation,
                cam,
                strict_class_set=strict_class_set,
                propagate_ignore=propagate_ignore,
            )
        except DimensionMismatch as exc:
            errors[image_id] = str(exc)
            continue
        outputs[image_id] = merged
        reports[image_id] = report

    return PropagationResult(
        outputs=outputs, reports=reports, warnings=tuple(warnings), errors=errors
    )
