"""Synthetic evolving-content datasets with exact ground truth.

Each subject carries one shape per class (disks and rounded rectangles
with per-class fixed hues) on a noisy gray background. Shapes shrink by a
configurable decay rate per timestep and may jitter by a bounded
translation, so adjacent timesteps stay similar while distant ones drift.
An optional abrupt appearance change at a given timestep forces a sequence
split. Score maps are simulated from the ground truth by blurring the
class indicator and adding clamped Gaussian noise.

Everything is deterministic in the seed: each (subject, timestep) draws
from its own derived random stream, so per-subject parallelism cannot
change outputs.
"""
from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from PIL import Image
from scipy.ndimage import gaussian_filter

from .core.maskio import write_mask
from .core.manifest import write_manifest
from .core.scoremapio import write_scoremap
from .core.types import ClassTable, DatasetManifest, ImageRecord, LabelMask, ScoreMap
from .errors import ConfigInvariantViolation, IoFailure

# Shapes never shrink below this radius, so no class ever vanishes from an
# image (image-level labels stay truthful).
MIN_RADIUS = 1.5


@dataclass(frozen=True)
class SynthConfig:
    subjects: int = 2
    classes_per_subject: int = 2
    timesteps: int = 5
    image_size: int = 64
    decay_rate: float = 0.1
    jitter: int = 1
    cam_noise_sigma: float = 0.1
    cam_blur_sigma: float = 1.5
    abrupt_change_at: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.timesteps < 1:
            raise ConfigInvariantViolation("timesteps must be >= 1")
        if not 0.0 <= self.decay_rate < 1.0:
            raise ConfigInvariantViolation("decay_rate must lie in [0, 1)")
        if self.image_size < 16:
            raise ConfigInvariantViolation("image_size must be >= 16")
        if self.subjects < 1 or self.classes_per_subject < 1:
            raise ConfigInvariantViolation("subjects and classes_per_subject must be >= 1")
        if self.classes_per_subject > 254:
            raise ConfigInvariantViolation("classes_per_subject must be <= 254")
        if self.jitter < 0:
            raise ConfigInvariantViolation("jitter must be >= 0")
        if self.cam_noise_sigma < 0 or self.cam_blur_sigma < 0:
            raise ConfigInvariantViolation("cam sigmas must be >= 0")


@dataclass(frozen=True)
class Disk:
    class_index: int
    cx: float
    cy: float
    radius: float

    def contains(self, xx, yy):
        return (xx - self.cx) ** 2 + (yy - self.cy) ** 2 <= self.radius**2


@dataclass(frozen=True)
class RoundedRect:
    class_index: int
    cx: float
    cy: float
    half_w: float
    half_h: float
    corner_radius: float

    def contains(self, xx, yy):
        ux = np.maximum(np.abs(xx - self.cx) - (self.half_w - self.corner_radius), 0.0)
        uy = np.maximum(np.abs(yy - self.cy) - (self.half_h - self.corner_radius), 0.0)
        return ux**2 + uy**2 <= self.corner_radius**2


Shape = Union[Disk, RoundedRect]


def _rng(config: SynthConfig, subject: int, timestep: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(config.seed, spawn_key=(subject, timestep, stream))
    )


def cam_seed(config: SynthConfig, subject: int, timestep: int) -> int:
    return int(_rng(config, subject, timestep, 2).integers(0, 2**63))


def scene_shapes(config: SynthConfig, subject: int, timestep: int) -> list[Shape]:
    """Analytic scene description for one image; the rasterization oracle."""
    k = config.classes_per_subject
    grid = math.ceil(math.sqrt(k))
    cell = config.image_size / grid
    base_radius = 0.32 * cell
    effective_jitter = min(config.jitter, int(0.15 * cell))
    decay = (1.0 - config.decay_rate) ** timestep
    rng = _rng(config, subject, timestep, 0)

    shapes: list[Shape] = []
    for c in range(1, k + 1):
        row, col = divmod(c - 1, grid)
        cx = (col + 0.5) * cell
        cy = (row + 0.5) * cell
        if effective_jitter > 0:
            dx, dy = rng.integers(-effective_jitter, effective_jitter + 1, size=2)
            cx += float(dx)
            cy += float(dy)
        r = max(base_radius * decay, MIN_RADIUS)
        if c % 2 == 1:
            shapes.append(Disk(class_index=c, cx=cx, cy=cy, radius=r))
        else:
            half_h = 0.75 * r
            shapes.append(
                RoundedRect(
                    class_index=c,
                    cx=cx,
                    cy=cy,
                    half_w=r,
                    half_h=half_h,
                    corner_radius=0.3 * half_h,
                )
            )
    return shapes


def rasterize_mask(shapes: list[Shape], size: int) -> LabelMask:
    """Exact rasterization: pixel (x, y) belongs to a shape iff its integer
    center satisfies the shape's analytic inequality."""
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    out = np.zeros((size, size), dtype=np.uint8)
    for shape in sorted(shapes, key=lambda s: s.class_index):
        out[shape.contains(xx, yy)] = shape.class_index
    return LabelMask(out)


def class_color(class_index: int, n_cl: int) -> tuple[float, float, float]:
    hue = ((class_index - 1) / max(n_cl, 1)) * 0.85
    return colorsys.hsv_to_rgb(hue, 0.6, 0.85)


def render_rgb(
    shapes: list[Shape], config: SynthConfig, subject: int, timestep: int
) -> np.ndarray:
    size = config.image_size
    abrupt = config.abrupt_change_at is not None and timestep >= config.abrupt_change_at
    base = (0.78, 0.72, 0.55) if abrupt else (0.35, 0.35, 0.35)
    img = np.empty((size, size, 3), dtype=np.float64)
    img[:] = base
    rng = _rng(config, subject, timestep, 1)
    img += rng.normal(0.0, 0.02, (size, size, 1))

    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    for shape in sorted(shapes, key=lambda s: s.class_index):
        img[shape.contains(xx, yy)] = class_color(shape.class_index, config.classes_per_subject)
    return (np.clip(img, 0.0, 1.0) * 255.0).round().astype(np.uint8)


def synth_scoremap(gt: LabelMask, config: SynthConfig, seed: int) -> ScoreMap:
    """Simulated attention maps: blurred class indicators plus clamped noise."""
    rng = np.random.default_rng(seed)
    planes = np.empty((config.classes_per_subject, gt.height, gt.width), dtype=np.float64)
    for c in range(1, config.classes_per_subject + 1):
        plane = (gt.data == c).astype(np.float64)
        if config.cam_blur_sigma > 0:
            plane = gaussian_filter(plane, sigma=config.cam_blur_sigma)
        if config.cam_noise_sigma > 0:
            plane = plane + rng.normal(0.0, config.cam_noise_sigma, plane.shape)
        planes[c - 1] = plane
    return ScoreMap(np.clip(planes, 0.0, 1.0).astype(np.float32))


def generate_dataset(config: SynthConfig, output_dir: Path | str) -> DatasetManifest:
    """Emit images, ground-truth masks, score maps, and a manifest."""
    output_dir = Path(output_dir)
    images_dir = output_dir / "images"
    gt_dir = output_dir / "gt"
    maps_dir = output_dir / "scoremaps"
    try:
        for d in (images_dir, gt_dir, maps_dir):
            d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create dataset layout under {output_dir}: {exc}") from exc

    classes = ClassTable(
        ("background",) + tuple(f"shape{i:02d}" for i in range(1, config.classes_per_subject + 1))
    )
    records = []
    try:
        for subject in range(config.subjects):
            subject_name = f"s{subject:02d}"
            for t in range(config.timesteps):
                image_id = f"{subject_name}t{t:03d}"
                shapes = scene_shapes(config, subject, t)
                gt_mask = rasterize_mask(shapes, config.image_size)
                rgb = render_rgb(shapes, config, subject, t)
                smap = synth_scoremap(gt_mask, config, cam_seed(config, subject, t))

                image_path = images_dir / f"{image_id}.png"
                gt_path = gt_dir / f"{image_id}.png"
                map_path = maps_dir / f"{image_id}.smp1"
                Image.fromarray(rgb, mode="RGB").save(image_path, format="PNG")
                write_mask(gt_mask, gt_path)
                write_scoremap(smap, map_path)

                present = np.unique(gt_mask.data)
                labels = frozenset(int(c) for c in present if c != 0)
                records.append(
                    ImageRecord(
                        id=image_id,
                        image_path=image_path.resolve(),
                        class_labels=labels,
                        subject=subject_name,
                        timestep=t,
                        scoremap_path=map_path.resolve(),
                        gt_mask_path=gt_path.resolve(),
                    )
                )
    except OSError as exc:
        raise IoFailure(f"failed writing dataset files: {exc}") from exc

    manifest = DatasetManifest(classes=classes, images=tuple(records))
    write_manifest(manifest, output_dir / "manifest.json")
    return manifest
