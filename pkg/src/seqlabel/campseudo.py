"""CAM-based pseudo labels: score thresholding and dense-CRF refinement.

Thresholding trisects per-pixel attention scores into a class assignment
(score above the foreground threshold), background (below the background
threshold), or ignore. Refinement runs mean-field inference with Gaussian
spatial and bilateral Potts kernels over the full pixel graph, using naive
O(N^2) message passing on a raster downsampled to a bounded side length.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core.types import IGNORE, LabelMask, ScoreMap
from .errors import ConfigInvariantViolation, DimensionMismatch, EmptyLabelSet, ValueOutOfRange

# Probability floor for unary potentials; keeps -log finite.
UNARY_FLOOR = 1e-6


@dataclass(frozen=True)
class ThresholdConfig:
    fg_threshold: float = 0.30
    bg_threshold: float = 0.05

    def __post_init__(self):
        if not 0.0 <= self.fg_threshold <= 1.0 or not 0.0 <= self.bg_threshold <= 1.0:
            raise ConfigInvariantViolation("thresholds must lie in [0, 1]")
        if self.bg_threshold > self.fg_threshold:
            raise ConfigInvariantViolation(
                f"bg_threshold {self.bg_threshold} must not exceed fg_threshold {self.fg_threshold}"
            )


@dataclass(frozen=True)
class CrfConfig:
    iterations: int = 5
    spatial_weight: float = 3.0
    spatial_sigma: float = 3.0
    bilateral_weight: float = 4.0
    bilateral_spatial_sigma: float = 32.0
    bilateral_color_sigma: float = 13.0
    downsample_max_side: int = 128
    keep_ignore: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigInvariantViolation("iterations must be >= 1")
        if self.spatial_weight < 0 or self.bilateral_weight < 0:
            raise ConfigInvariantViolation("pairwise weights must be >= 0")
        for name in ("spatial_sigma", "bilateral_spatial_sigma", "bilateral_color_sigma"):
            if getattr(self, name) <= 0:
                raise ConfigInvariantViolation(f"{name} must be > 0")
        if self.downsample_max_side < 1:
            raise ConfigInvariantViolation("downsample_max_side must be >= 1")


def threshold_cam(
    smap: ScoreMap,
    image_level_labels: Iterable[int],
    config: ThresholdConfig = ThresholdConfig(),
) -> LabelMask:
    """Trisect scores into class / background / ignore.

    Only classes present in the image-level label set can be assigned; the
    winning class per pixel is the score argmax over that set with ties
    broken toward the smaller class index.
    """
    labels = sorted(set(int(c) for c in image_level_labels))
    if not labels:
        raise EmptyLabelSet("image-level label set is empty")
    if labels[0] < 1 or labels[-1] > smap.n_cl:
        raise ValueOutOfRange(
            f"image-level labels must lie in 1..{smap.n_cl}, got {labels}"
        )
    label_arr = np.asarray(labels, dtype=np.uint8)
    candidate = smap.planes[[c - 1 for c in labels]]
    # argmax returns the first maximum, i.e. the smallest class index.
    winner = label_arr[np.argmax(candidate, axis=0)]
    best = candidate.max(axis=0)

    out = np.full((smap.height, smap.width), IGNORE, dtype=np.uint8)
    out[best > config.fg_threshold] = winner[best > config.fg_threshold]
    out[best < config.bg_threshold] = 0
    return LabelMask(out)


@dataclass(frozen=True)
class CrfIterationStats:
    max_marginal_change: float
    max_normalization_error: float


@dataclass(frozen=True)
class CrfResult:
    mask: LabelMask
    iterations: tuple[CrfIterationStats, ...] = field(default_factory=tuple)


def _nearest_indices(full: int, small: int) -> np.ndarray:
    return np.minimum(((np.arange(small) + 0.5) * full / small).astype(np.int64), full - 1)


def unary_probabilities(smap: ScoreMap) -> np.ndarray:
    """(n_cl+1, H, W) pseudo-probabilities: plane 0 is the background
    1 - max class score; all floored at UNARY_FLOOR."""
    best = smap.planes.max(axis=0)
    probs = np.empty((smap.n_cl + 1, smap.height, smap.width), dtype=np.float64)
    probs[0] = np.clip(1.0 - best, UNARY_FLOOR, 1.0)
    probs[1:] = np.clip(smap.planes, UNARY_FLOOR, 1.0)
    return probs


# Above this pixel count the combined pairwise kernel is recomputed per
# iteration in row chunks instead of being held in memory (N^2 float32,
# ~1 GiB at the 128x128 downsample default).
_KERNEL_CACHE_MAX_PIXELS = 16_500


def _pairwise_sq(a_rows: np.ndarray, a_all: np.ndarray) -> np.ndarray:
    """Squared euclidean distances (B, N), float32."""
    sq_rows = (a_rows**2).sum(axis=1)
    sq_all = (a_all**2).sum(axis=1)
    out = sq_rows[:, None] + sq_all[None, :] - np.float32(2.0) * (a_rows @ a_all.T)
    np.maximum(out, np.float32(0.0), out=out)
    return out


def _kernel_chunk(
    rows: slice,
    xy: np.ndarray,
    colors: np.ndarray,
    part: np.ndarray,
    config: CrfConfig,
) -> np.ndarray:
    """Row block of the combined message operator: each kernel is masked to
    participating senders, has its self-message removed, and is normalized
    per row before weighting, so messages are size-invariant averages."""
    d2 = _pairwise_sq(xy[rows], xy)
    combined = None

    def normalized(ker: np.ndarray, weight: float) -> np.ndarray:
        ker *= part[None, :]
        _zero_diagonal(ker, rows.start)
        norm = ker.sum(axis=1)
        np.maximum(norm, np.float32(1e-30), out=norm)
        ker *= (np.float32(weight) / norm)[:, None]
        return ker

    if config.spatial_weight > 0:
        arg = d2 * np.float32(-0.5 / config.spatial_sigma**2)
        combined = normalized(np.exp(arg, out=arg), config.spatial_weight)
    if config.bilateral_weight > 0:
        arg = d2 * np.float32(-0.5 / config.bilateral_spatial_sigma**2)
        dc2 = _pairwise_sq(colors[rows], colors)
        dc2 *= np.float32(-0.5 / config.bilateral_color_sigma**2)
        arg += dc2
        ker = normalized(np.exp(arg, out=arg), config.bilateral_weight)
        if combined is None:
            combined = ker
        else:
            combined += ker
    if combined is None:
        combined = np.zeros_like(d2)
    return combined


def _mean_field(
    unary: np.ndarray,  # (N, C) energies, float64
    xy: np.ndarray,  # (N, 2) pixel coordinates
    colors: np.ndarray,  # (N, 3) RGB in 0..255
    participate: np.ndarray,  # (N,) bool
    config: CrfConfig,
) -> tuple[np.ndarray, list[CrfIterationStats]]:
    n, n_states = unary.shape
    q0 = np.exp(-unary)
    q0 /= q0.sum(axis=1, keepdims=True)
    q = q0.copy()

    part = participate.astype(np.float32)
    xy32 = xy.astype(np.float32)
    col32 = colors.astype(np.float32)
    chunk = max(1, min(n, 4096))
    chunks = [slice(s, min(s + chunk, n)) for s in range(0, n, chunk)]

    cached = None
    if n <= _KERNEL_CACHE_MAX_PIXELS:
        cached = np.empty((n, n), dtype=np.float32)
        for rows in chunks:
            cached[rows] = _kernel_chunk(rows, xy32, col32, part, config)

    stats = []
    for _ in range(config.iterations):
        # Jacobi update: all messages read the previous iteration's marginals.
        q32 = q.astype(np.float32)
        if cached is not None:
            message = cached @ q32
        else:
            message = np.empty((n, n_states), dtype=np.float32)
            for rows in chunks:
                message[rows] = _kernel_chunk(rows, xy32, col32, part, config) @ q32
        logits = -unary + message.astype(np.float64)
        logits -= logits.max(axis=1, keepdims=True)
        np.exp(logits, out=logits)
        logits /= logits.sum(axis=1, keepdims=True)
        q_new = logits
        q_new[~participate] = q0[~participate]
        stats.append(
            CrfIterationStats(
                max_marginal_change=float(np.abs(q_new - q).max()),
                max_normalization_error=float(np.abs(q_new.sum(axis=1) - 1.0).max()),
            )
        )
        q = q_new
    return q, stats


def _zero_diagonal(kernel: np.ndarray, row_offset: int) -> None:
    rows = np.arange(kernel.shape[0])
    cols = rows + row_offset
    valid = cols < kernel.shape[1]
    kernel[rows[valid], cols[valid]] = 0.0


def refine_crf_detailed(
    smap: ScoreMap,
    rgb_image: np.ndarray,
    initial_mask: LabelMask,
    config: CrfConfig = CrfConfig(),
) -> CrfResult:
    """Mean-field refinement with per-iteration diagnostics.

    Unary energies come from the score map only (-log score per class,
    background from 1 - max score). With keep_ignore, pixels marked ignore
    in the initial mask neither send nor receive messages and stay 255 in
    the output. Messages are averaged per kernel (row-normalized) so the
    update is invariant to raster size. With both pairwise weights zero the
    output is exactly the per-pixel argmax of the unaries at processing
    resolution.
    """
    rgb_image = np.asarray(rgb_image)
    if rgb_image.ndim != 3 or rgb_image.shape[2] != 3:
        raise DimensionMismatch(f"expected (H, W, 3) RGB image, got shape {rgb_image.shape}")
    h, w = smap.height, smap.width
    if rgb_image.shape[:2] != (h, w) or (initial_mask.height, initial_mask.width) != (h, w):
        raise DimensionMismatch(
            f"score map {w}x{h}, image {rgb_image.shape[1]}x{rgb_image.shape[0]}, "
            f"mask {initial_mask.width}x{initial_mask.height} must agree"
        )

    if max(h, w) > config.downsample_max_side:
        scale = config.downsample_max_side / max(h, w)
        hs = max(1, round(h * scale))
        ws = max(1, round(w * scale))
    else:
        hs, ws = h, w
    row_idx = _nearest_indices(h, hs)
    col_idx = _nearest_indices(w, ws)

    probs = unary_probabilities(smap)[:, row_idx][:, :, col_idx]
    n_states = probs.shape[0]
    unary = -np.log(probs.reshape(n_states, hs * ws).T)

    small_mask = initial_mask.data[row_idx][:, col_idx]
    participate = (
        (small_mask != IGNORE).ravel()
        if config.keep_ignore
        else np.ones(hs * ws, dtype=bool)
    )

    yy, xx = np.mgrid[0:hs, 0:ws]
    xy = np.stack([xx.ravel(), yy.ravel()], axis=1).astype(np.float64)
    colors = rgb_image[row_idx][:, col_idx].reshape(hs * ws, 3).astype(np.float64)

    q, stats = _mean_field(unary, xy, colors, participate, config)
    small_labels = np.argmax(q, axis=1).astype(np.uint8).reshape(hs, ws)

    up_rows = _nearest_indices(hs, h) if hs != h else np.arange(h)
    up_cols = _nearest_indices(ws, w) if ws != w else np.arange(w)
    full = small_labels[up_rows][:, up_cols].copy()
    if config.keep_ignore:
        full[initial_mask.data == IGNORE] = IGNORE
    return CrfResult(mask=LabelMask(full), iterations=tuple(stats))


def refine_crf(
    smap: ScoreMap,
    rgb_image: np.ndarray,
    initial_mask: LabelMask,
    config: CrfConfig = CrfConfig(),
) -> LabelMask:
    return refine_crf_detailed(smap, rgb_image, initial_mask, config).mask
