"""Per-image feature vectors for similarity-based sequencing.

Default features are L1-normalized per-channel RGB histograms (64 bins
each, 192 dims). External vectors can be supplied as FVE1 sidecar files
(magic "FVE1", u32 LE dimension, f32 LE values) named <image_path>.fve.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

from ..core.images import load_rgb
from ..core.types import ImageRecord
from ..errors import (
    BadMagic,
    ConfigInvariantViolation,
    DimensionMismatch,
    MissingFeatureFile,
    NonFiniteValue,
    TruncatedFile,
)

FVE_MAGIC = b"FVE1"


@dataclass(frozen=True)
class SequencerConfig:
    distance: Literal["cosine", "l1"] = "cosine"
    split_threshold: float = 0.15
    feature_source: Literal["histogram", "external_file"] = "histogram"
    histogram_bins: int = 64

    def __post_init__(self):
        if self.distance not in ("cosine", "l1"):
            raise ConfigInvariantViolation(f"unknown distance {self.distance!r}")
        if self.feature_source not in ("histogram", "external_file"):
            raise ConfigInvariantViolation(f"unknown feature source {self.feature_source!r}")
        if self.split_threshold < 0:
            raise ConfigInvariantViolation("split_threshold must be >= 0")
        if self.histogram_bins < 2:
            raise ConfigInvariantViolation("histogram_bins must be >= 2")


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    source: Literal["histogram", "external"]

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.source == "histogram" and abs(float(values.sum()) - 1.0) > 1e-6:
            raise ConfigInvariantViolation("histogram features must be L1-normalized")

    def __eq__(self, other):
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.source == other.source and np.array_equal(self.values, other.values)


def rgb_histogram(rgb: np.ndarray, bins: int) -> np.ndarray:
    """Concatenated per-channel histogram, L1-normalized over all 3*bins entries."""
    parts = []
    for ch in range(3):
        idx = (rgb[:, :, ch].astype(np.int64) * bins) // 256
        parts.append(np.bincount(idx.ravel(), minlength=bins).astype(np.float64))
    vec = np.concatenate(parts)
    return vec / vec.sum()


def read_feature_file(path: Path | str) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise MissingFeatureFile(f"feature sidecar not found: {path}")
    data = path.read_bytes()
    if len(data) < 4 or data[:4] != FVE_MAGIC:
        raise BadMagic(f"expected magic {FVE_MAGIC!r} in {path}")
    if len(data) < 8:
        raise TruncatedFile(f"feature file header truncated: {path}")
    (dim,) = struct.unpack_from("<I", data, 4)
    payload = data[8:]
    if len(payload) != dim * 4:
        raise TruncatedFile(f"expected {dim * 4} payload bytes in {path}, got {len(payload)}")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if not np.isfinite(values).all():
        raise NonFiniteValue(f"feature file contains non-finite values: {path}")
    return values


def write_feature_file(values: np.ndarray, path: Path | str) -> None:
    values = np.asarray(values, dtype="<f4")
    Path(path).write_bytes(FVE_MAGIC + struct.pack("<I", values.size) + values.tobytes())


def feature_sidecar_path(record: ImageRecord) -> Path:
    return Path(str(record.image_path) + ".fve")


def extract_features(record: ImageRecord, config: SequencerConfig) -> FeatureVector:
    """Feature vector for one image; deterministic for identical pixel content."""
    if config.feature_source == "histogram":
        rgb = load_rgb(record.image_path)
        return FeatureVector(rgb_histogram(rgb, config.histogram_bins), source="histogram")
    return FeatureVector(read_feature_file(feature_sidecar_path(record)), source="external")


def distance(a: FeatureVector, b: FeatureVector, metric: str) -> float:
    va, vb = a.values, b.values
    if va.shape != vb.shape:
        raise DimensionMismatch(f"feature dimensions differ: {va.shape} vs {vb.shape}")
    if metric == "l1":
        return float(np.abs(va - vb).sum())
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    cos = float(np.dot(va, vb)) / (na * nb)
    return 1.0 - min(1.0, max(-1.0, cos))
