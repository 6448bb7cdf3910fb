"""seqlabel: pseudo-pixel-level labels for evolving-content image datasets."""

from .core import (
    IGNORE,
    ClassTable,
    DatasetManifest,
    ImageRecord,
    LabelMask,
    ScoreMap,
    load_manifest,
    read_mask,
    read_scoremap,
    write_manifest,
    write_mask,
    write_scoremap,
)
from .campseudo import CrfConfig, ThresholdConfig, refine_crf, threshold_cam
from .merger import MergeReport, merge_labels, propagate_sequence
from .metrics import ConfusionMatrix, confusion_matrix, fw_iou, mean_iou, per_class_iou
from .sequencer import Sequence, SequencerConfig, SequenceSet, build_sequences, extract_features
from .synthgen import SynthConfig, generate_dataset, synth_scoremap

__version__ = "0.1.0"

__all__ = [
    "IGNORE",
    "ClassTable",
    "DatasetManifest",
    "ImageRecord",
    "LabelMask",
    "ScoreMap",
    "load_manifest",
    "read_mask",
    "read_scoremap",
    "write_manifest",
    "write_mask",
    "write_scoremap",
    "CrfConfig",
    "ThresholdConfig",
    "refine_crf",
    "threshold_cam",
    "MergeReport",
    "merge_labels",
    "propagate_sequence",
    "ConfusionMatrix",
    "confusion_matrix",
    "fw_iou",
    "mean_iou",
    "per_class_iou",
    "Sequence",
    "SequencerConfig",
    "SequenceSet",
    "build_sequences",
    "extract_features",
    "SynthConfig",
    "generate_dataset",
    "synth_scoremap",
    "__version__",
]
