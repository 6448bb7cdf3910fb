"""On-disk workspace shared by the pipeline CLI and the annotation service.

Layout under the workspace root:

    manifest.json            dataset manifest
    sequences.json           sequencer output
    representatives.txt      one "<sequence_id> <image_id>" line per sequence
    annotations/<seq>.png    manual annotation per sequence
    campseudo/<image>.png    CAM pseudo labels
    merged/<image>.png       merged pseudo labels
    reports/                 merge reports and metrics

Every mutation is write-temp-then-rename, and writers serialize through a
lock file, so a crash never leaves a partial file visible.
"""
from __future__ import annotations

import colorsys
import contextlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from filelock import FileLock, Timeout
from scipy.ndimage import binary_dilation, binary_erosion

from .core.maskio import encode_mask_png, read_mask
from .core.manifest import load_manifest
from .core.types import IGNORE, ClassTable, DatasetManifest, LabelMask
from .errors import (
    AnnotationHasIgnorePixels,
    MissingFile,
    NoOverlap,
    ValueOutOfRange,
    WorkspaceLocked,
)
from .merger import PropagationResult, propagate_sequence
from .metrics import ConfusionMatrix, confusion_matrix, metrics_doc
from .sequencer.sequences import Sequence, SequenceSet, load_sequence_set

STATUS_UNANNOTATED = "unannotated"
STATUS_ANNOTATED = "annotated"
STATUS_PROPAGATED = "propagated"


def atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.parent / f".{path.name}.tmp{os.getpid()}"
    tmp.write_bytes(data)
    os.replace(tmp, path)


def atomic_write_json(path: Path, doc) -> None:
    atomic_write_bytes(path, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8"))


def class_palette(classes: ClassTable) -> list[dict]:
    """Deterministic per-class display colors (index 0 is black)."""
    legend = []
    for index, name in enumerate(classes.names):
        if index == 0:
            rgb = (0, 0, 0)
        else:
            hue = (index * 137.50776405003785) % 360.0
            r, g, b = colorsys.hsv_to_rgb(hue / 360.0, 0.65, 0.9)
            rgb = (round(r * 255), round(g * 255), round(b * 255))
        legend.append({"index": index, "name": name, "color": list(rgb)})
    return legend


@dataclass
class Workspace:
    root: Path

    def __init__(self, root: Path | str):
        self.root = Path(root)

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    @property
    def sequences_path(self) -> Path:
        return self.root / "sequences.json"

    @property
    def representatives_path(self) -> Path:
        return self.root / "representatives.txt"

    @property
    def annotations_dir(self) -> Path:
        return self.root / "annotations"

    @property
    def campseudo_dir(self) -> Path:
        return self.root / "campseudo"

    @property
    def merged_dir(self) -> Path:
        return self.root / "merged"

    @property
    def reports_dir(self) -> Path:
        return self.root / "reports"

    def ensure_layout(self) -> None:
        for d in (self.annotations_dir, self.campseudo_dir, self.merged_dir, self.reports_dir):
            d.mkdir(parents=True, exist_ok=True)

    def annotation_path(self, sequence_id: str) -> Path:
        return self.annotations_dir / f"{sequence_id}.png"

    def campseudo_path(self, image_id: str) -> Path:
        return self.campseudo_dir / f"{image_id}.png"

    def merged_path(self, image_id: str) -> Path:
        return self.merged_dir / f"{image_id}.png"

    def merge_report_path(self, image_id: str) -> Path:
        return self.reports_dir / f"{image_id}.merge.json"

    def metrics_report_path(self) -> Path:
        return self.reports_dir / "metrics.json"

    def load_manifest(self) -> DatasetManifest:
        return load_manifest(self.manifest_path)

    def load_sequences(self) -> SequenceSet:
        return load_sequence_set(self.sequences_path)

    @contextlib.contextmanager
    def writer_lock(self, timeout: float = 30.0) -> Iterator[None]:
        """Serializes all workspace mutations across processes."""
        self.root.mkdir(parents=True, exist_ok=True)
        lock = FileLock(str(self.root / ".lock"))
        try:
            with lock.acquire(timeout=timeout):
                yield
        except Timeout as exc:
            raise WorkspaceLocked(f"workspace {self.root} is locked by another writer") from exc

    def sequence_status(self, sequence: Sequence) -> str:
        if not self.annotation_path(sequence.id).is_file():
            return STATUS_UNANNOTATED
        if all(self.merged_path(i).is_file() for i in sequence.image_ids):
            return STATUS_PROPAGATED
        return STATUS_ANNOTATED


def load_annotation(
    workspace: Workspace, sequence_id: str, classes: ClassTable
) -> LabelMask:
    mask = read_mask(workspace.annotation_path(sequence_id), classes)
    if (mask.data == IGNORE).any():
        raise AnnotationHasIgnorePixels(
            f"annotation for sequence {sequence_id!r} contains ignore pixels"
        )
    return mask


def load_cam_labels(
    workspace: Workspace, sequence: Sequence, classes: ClassTable
) -> dict[str, LabelMask]:
    labels = {}
    for image_id in sequence.image_ids:
        path = workspace.campseudo_path(image_id)
        if path.is_file():
            labels[image_id] = read_mask(path, classes)
    return labels


def store_propagation(workspace: Workspace, result: PropagationResult) -> None:
    """Write merged masks and their merge reports atomically."""
    workspace.merged_dir.mkdir(parents=True, exist_ok=True)
    workspace.reports_dir.mkdir(parents=True, exist_ok=True)
    for image_id in sorted(result.outputs):
        atomic_write_bytes(
            workspace.merged_path(image_id), encode_mask_png(result.outputs[image_id])
        )
        atomic_write_json(
            workspace.merge_report_path(image_id), result.reports[image_id].to_doc()
        )


def propagate_and_store(
    workspace: Workspace,
    sequence: Sequence,
    annotation: LabelMask,
    classes: ClassTable,
    *,
    strict_class_set: bool = False,
    propagate_ignore: bool = False,
) -> PropagationResult:
    cam_labels = load_cam_labels(workspace, sequence, classes)
    result = propagate_sequence(
        sequence,
        annotation,
        cam_labels,
        strict_class_set=strict_class_set,
        propagate_ignore=propagate_ignore,
    )
    store_propagation(workspace, result)
    return result


def distort_annotation(mask: LabelMask, amount: int, mode: str) -> LabelMask:
    """Erode or dilate every class region by `amount` pixels (robustness studies)."""
    if amount <= 0:
        return mask
    out = mask.data.copy()
    for c in np.unique(mask.data):
        if c == 0 or c == IGNORE:
            continue
        region = mask.data == c
        if mode == "erode":
            out[region & ~binary_erosion(region, iterations=amount)] = 0
        else:
            grown = binary_dilation(region, iterations=amount) & (mask.data == 0)
            out[grown] = c
    return LabelMask(out)


def annotations_from_ground_truth(
    workspace: Workspace,
    manifest: DatasetManifest,
    sequences: SequenceSet,
    noise: int = 0,
) -> None:
    """Simulate the manual annotation step by copying each representative's
    ground-truth mask (optionally eroded/dilated by `noise` pixels)."""
    workspace.annotations_dir.mkdir(parents=True, exist_ok=True)
    for index, seq in enumerate(sequences.sequences):
        rec = manifest.by_id(seq.representative_id)
        if rec.gt_mask_path is None:
            raise MissingFile(f"image {rec.id!r} has no ground-truth mask to annotate from")
        gt = read_mask(rec.gt_mask_path, manifest.classes)
        if (gt.data == IGNORE).any():
            raise AnnotationHasIgnorePixels(f"ground truth for {rec.id!r} has ignore pixels")
        mask = distort_annotation(gt, noise, "erode" if index % 2 == 0 else "dilate")
        atomic_write_bytes(workspace.annotation_path(seq.id), encode_mask_png(mask))


def evaluate_predictions(
    manifest: DatasetManifest,
    pred_dir: Path,
    include_background: bool = True,
    pred_ignore_as: str = "exclude",
) -> tuple[ConfusionMatrix, int]:
    """Aggregate confusion matrices over every image having both a prediction
    file and a ground-truth mask. pred_ignore_as="background" rescores ignore
    pixels in predictions as background instead of excluding them."""
    if pred_ignore_as not in ("exclude", "background"):
        raise ValueOutOfRange(f"pred_ignore_as must be exclude|background, got {pred_ignore_as!r}")
    n_cl_total = manifest.classes.n_cl + 1
    total: Optional[ConfusionMatrix] = None
    n_images = 0
    for rec in manifest.images:
        pred_path = Path(pred_dir) / f"{rec.id}.png"
        if rec.gt_mask_path is None or not pred_path.is_file():
            continue
        pred = read_mask(pred_path, manifest.classes)
        if pred_ignore_as == "background":
            data = pred.data.copy()
            data[data == IGNORE] = 0
            pred = LabelMask(data)
        gt = read_mask(rec.gt_mask_path, manifest.classes)
        cm = confusion_matrix(pred, gt, n_cl_total, include_background=include_background)
        total = cm if total is None else total + cm
        n_images += 1
    if total is None:
        raise NoOverlap("no image has both a prediction and a ground-truth mask")
    return total, n_images


def evaluation_doc(
    manifest: DatasetManifest,
    pred_dir: Path,
    include_background: bool = True,
    pred_ignore_as: str = "exclude",
) -> dict:
    cm, n_images = evaluate_predictions(
        manifest, pred_dir, include_background=include_background, pred_ignore_as=pred_ignore_as
    )
    doc = metrics_doc(cm, manifest.classes.names)
    doc["n_images"] = n_images
    doc["pred_ignore_as"] = pred_ignore_as
    return doc
