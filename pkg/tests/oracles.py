"""Independent brute-force oracles used to pin expected test values.

Everything here is written as plain per-pixel / per-element Python loops,
deliberately sharing no code with the implementations under test.
"""
from __future__ import annotations

import math

import numpy as np

IGNORE = 255


def merge_rule_oracle(y_s: np.ndarray, y_p: np.ndarray, strict_class_set: bool = False) -> np.ndarray:
    """Per-pixel merge rule applied literally, one pixel at a time."""
    out = np.array(y_s, dtype=np.uint8, copy=True)
    annotated = set(int(v) for v in y_s.ravel() if v != 0)
    h, w = y_s.shape
    for r in range(h):
        for c in range(w):
            p = int(y_p[r, c])
            s = int(y_s[r, c])
            in_cam_class = p != 0 and p != IGNORE
            not_in_annotation = s == 0
            if strict_class_set:
                in_cam_class = in_cam_class and p not in annotated
            if in_cam_class and not_in_annotation:
                out[r, c] = p
    return out


def histogram_oracle(rgb: np.ndarray, bins: int) -> list[float]:
    counts = [0] * (3 * bins)
    h, w, _ = rgb.shape
    for r in range(h):
        for c in range(w):
            for ch in range(3):
                counts[ch * bins + (int(rgb[r, c, ch]) * bins) // 256] += 1
    total = 3 * h * w
    return [v / total for v in counts]


def l1_distance_oracle(a, b) -> float:
    return sum(abs(x - y) for x, y in zip(a, b))


def cosine_distance_oracle(a, b) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    return 1.0 - min(1.0, max(-1.0, dot / (na * nb)))


def medoid_oracle(ids, vectors, metric) -> str:
    dist = l1_distance_oracle if metric == "l1" else cosine_distance_oracle
    best = None
    for i in sorted(ids):
        total = sum(dist(vectors[i], vectors[j]) for j in ids if j != i)
        if best is None or total < best[1]:
            best = (i, total)
    return best[0]


def confusion_oracle(pred: np.ndarray, gt: np.ndarray, n_total: int) -> tuple[np.ndarray, int]:
    counts = np.zeros((n_total, n_total), dtype=np.int64)
    ignored = 0
    for p, g in zip(pred.ravel(), gt.ravel()):
        if p == IGNORE or g == IGNORE:
            ignored += 1
        else:
            counts[int(g), int(p)] += 1
    return counts, ignored


def iou_oracle(counts: np.ndarray, class_index: int) -> float | None:
    n_ii = counts[class_index, class_index]
    t_i = counts[class_index, :].sum()
    col = counts[:, class_index].sum()
    denom = t_i + col - n_ii
    if denom == 0:
        return None
    return float(n_ii) / float(denom)


def threshold_oracle(scores: np.ndarray, labels: list[int], fg: float, bg: float) -> np.ndarray:
    """scores: (n_cl, h, w); labels sorted ascending."""
    _, h, w = scores.shape
    out = np.zeros((h, w), dtype=np.uint8)
    for r in range(h):
        for c in range(w):
            best_class, best_score = None, None
            for cls in sorted(labels):
                s = float(scores[cls - 1, r, c])
                if best_score is None or s > best_score:
                    best_class, best_score = cls, s
            if best_score > fg:
                out[r, c] = best_class
            elif best_score < bg:
                out[r, c] = 0
            else:
                out[r, c] = IGNORE
    return out


def mean_field_oracle(probs, xy, colors, participate, config):
    """Straightforward double-loop mean-field reference.

    probs: (N, C) unary pseudo-probabilities (already floored); returns the
    per-pixel marginals after config.iterations Jacobi updates with the
    same row-normalized spatial+bilateral Potts messages as the module
    under test, computed with scalar Python arithmetic.
    """
    n = len(probs)
    n_states = len(probs[0])
    unary = [[-math.log(p) for p in row] for row in probs]
    q = []
    for row in unary:
        exps = [math.exp(-u) for u in row]
        z = sum(exps)
        q.append([e / z for e in exps])
    q0 = [row[:] for row in q]

    for _ in range(config.iterations):
        q_new = [None] * n
        for i in range(n):
            if not participate[i]:
                q_new[i] = q0[i][:]
                continue
            msg = [0.0] * n_states
            for weight, kernel in (
                (config.spatial_weight, "spatial"),
                (config.bilateral_weight, "bilateral"),
            ):
                if weight <= 0:
                    continue
                ker_row = []
                for j in range(n):
                    if j == i or not participate[j]:
                        ker_row.append(0.0)
                        continue
                    d2 = (xy[i][0] - xy[j][0]) ** 2 + (xy[i][1] - xy[j][1]) ** 2
                    if kernel == "spatial":
                        k = math.exp(-d2 / (2 * config.spatial_sigma**2))
                    else:
                        dc2 = sum((colors[i][t] - colors[j][t]) ** 2 for t in range(3))
                        k = math.exp(
                            -d2 / (2 * config.bilateral_spatial_sigma**2)
                            - dc2 / (2 * config.bilateral_color_sigma**2)
                        )
                    ker_row.append(k)
                norm = sum(ker_row)
                if norm > 0:
                    for c in range(n_states):
                        avg = sum(ker_row[j] * q[j][c] for j in range(n)) / norm
                        msg[c] += weight * avg
            logits = [-unary[i][c] + msg[c] for c in range(n_states)]
            peak = max(logits)
            exps = [math.exp(v - peak) for v in logits]
            z = sum(exps)
            q_new[i] = [e / z for e in exps]
        q = q_new
    return q


def point_in_disk(x, y, cx, cy, radius) -> bool:
    return (x - cx) ** 2 + (y - cy) ** 2 <= radius**2


def point_in_rounded_rect(x, y, cx, cy, half_w, half_h, corner_radius) -> bool:
    ux = max(abs(x - cx) - (half_w - corner_radius), 0.0)
    uy = max(abs(y - cy) - (half_h - corner_radius), 0.0)
    return ux * ux + uy * uy <= corner_radius * corner_radius
