"""Shared domain types: class tables, label masks, score maps, manifests.

All types are immutable after construction and safe to share between
concurrent workers. Pixel rasters are numpy arrays with the write flag
cleared.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import InvariantViolation, ValueOutOfRange

# Pixel value reserved for "ignored"; not configurable.
IGNORE = 255

# Class indices 1..254 are usable; 0 is background, 255 is ignore.
MAX_CLASSES = 254


@dataclass(frozen=True)
class ClassTable:
    """Ordered class names; index 0 is always "background"."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names or names[0] != "background":
            raise InvariantViolation("class table must start with 'background'")
        if any(not isinstance(n, str) or not n for n in names):
            raise InvariantViolation("class names must be non-empty strings")
        if len(set(names)) != len(names):
            raise InvariantViolation("class names must be unique")
        if not 1 <= self.n_cl <= MAX_CLASSES:
            raise InvariantViolation(
                f"class count must be in 1..{MAX_CLASSES}, got {self.n_cl}"
            )

    @property
    def n_cl(self) -> int:
        """Number of non-background classes."""
        return len(self.names) - 1

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InvariantViolation(f"unknown class name {name!r}") from None

    def name_of(self, index: int) -> str:
        if not 0 <= index <= self.n_cl:
            raise InvariantViolation(f"class index {index} out of range 0..{self.n_cl}")
        return self.names[index]


@dataclass(frozen=True, eq=False)
class LabelMask:
    """Per-pixel class-index raster: 0 background, 1..n_cl classes, 255 ignore."""

    data: np.ndarray  # (height, width) uint8, row-major

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.uint8:
            raise InvariantViolation(f"mask data must be uint8, got {data.dtype}")
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InvariantViolation(f"mask data must be 2-D and non-empty, got shape {data.shape}")
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def validate_classes(self, classes: ClassTable) -> None:
        """Raise ValueOutOfRange if any pixel exceeds n_cl and is not ignore."""
        bad = (self.data > classes.n_cl) & (self.data != IGNORE)
        if bad.any():
            offending = int(self.data[bad].min())
            raise ValueOutOfRange(
                f"mask value {offending} exceeds class count {classes.n_cl} (and is not {IGNORE})"
            )

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabelMask):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.height, self.width, self.data.tobytes()))


@dataclass(frozen=True, eq=False)
class ScoreMap:
    """Per-class attention scores in [0, 1]; one plane per class 1..n_cl."""

    planes: np.ndarray  # (n_cl, height, width) float32

    def __post_init__(self):
        planes = np.asarray(self.planes)
        if planes.dtype != np.float32:
            planes = planes.astype(np.float32)
        if planes.ndim != 3 or planes.shape[0] < 1:
            raise InvariantViolation(f"score planes must be (n_cl, h, w), got shape {planes.shape}")
        if planes.shape[1] < 1 or planes.shape[2] < 1:
            raise InvariantViolation(f"score planes must be non-empty, got shape {planes.shape}")
        if not np.isfinite(planes).all():
            raise InvariantViolation("score values must be finite")
        if planes.min() < 0.0 or planes.max() > 1.0:
            raise InvariantViolation("score values must lie in [0, 1]")
        planes = np.ascontiguousarray(planes)
        planes.setflags(write=False)
        object.__setattr__(self, "planes", planes)

    @property
    def n_cl(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    def plane(self, class_index: int) -> np.ndarray:
        """Score plane for a class index in 1..n_cl (background has no plane)."""
        if not 1 <= class_index <= self.n_cl:
            raise InvariantViolation(f"class index {class_index} out of range 1..{self.n_cl}")
        return self.planes[class_index - 1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreMap):
            return NotImplemented
        return np.array_equal(self.planes, other.planes)

    def __hash__(self):
        return hash((self.planes.shape, self.planes.tobytes()))


@dataclass(frozen=True)
class ImageRecord:
    """One dataset image with its weak (image-level) labels and file paths."""

    id: str
    image_path: Path
    class_labels: frozenset[int]
    subject: str
    timestep: int
    scoremap_path: Optional[Path] = None
    gt_mask_path: Optional[Path] = None

    def __post_init__(self):
        if not self.id:
            raise InvariantViolation("image id must be non-empty")
        if not self.class_labels:
            raise InvariantViolation(f"image {self.id!r}: class_labels must be non-empty")
        if self.timestep < 0:
            raise InvariantViolation(f"image {self.id!r}: timestep must be non-negative")
        object.__setattr__(self, "class_labels", frozenset(int(c) for c in self.class_labels))


@dataclass(frozen=True)
class DatasetManifest:
    """Registry of images with their class table; `count` mirrors len(images)."""

    classes: ClassTable
    images: tuple[ImageRecord, ...] = field(default_factory=tuple)

    def __post_init__(self):
        images = tuple(self.images)
        object.__setattr__(self, "images", images)
        seen = set()
        for rec in images:
            if rec.id in seen:
                raise InvariantViolation(f"duplicate image id {rec.id!r}")
            seen.add(rec.id)
            bad = [c for c in rec.class_labels if not 1 <= c <= self.classes.n_cl]
            if bad:
                raise InvariantViolation(
                    f"image {rec.id!r}: class index {bad[0]} out of range 1..{self.classes.n_cl}"
                )

    @property
    def count(self) -> int:
        """Total number of images (the dataset size I)."""
        return len(self.images)

    def by_id(self, image_id: str) -> ImageRecord:
        for rec in self.images:
            if rec.id == image_id:
                return rec
        raise InvariantViolation(f"unknown image id {image_id!r}")
