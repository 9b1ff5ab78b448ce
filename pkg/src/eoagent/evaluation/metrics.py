"""Tool-level metric math: top-1, mIoU, rotated-box IoU, mAP@50, binary IoU.

Rotated-box intersection uses convex polygon clipping; average precision
uses all-point interpolation (area under the monotone precision
envelope). Classes with no ground truth are excluded from mAP rather
than scored zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ..raster import Mask


class MetricError(Exception):
    pass


class LengthMismatch(MetricError):
    pass


class EmptyInput(MetricError):
    pass


class ShapeMismatch(MetricError):
    pass


class DegenerateBox(MetricError):
    pass


def top1_accuracy(pred: Sequence[int], truth: Sequence[int]) -> float:
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(truth)} labels")
    if not truth:
        raise EmptyInput("no labels")
    matches = sum(1 for p, t in zip(pred, truth) if p == t)
    return matches / len(truth)


def _mask_values(m: Union[Mask, np.ndarray]) -> np.ndarray:
    return m.values if isinstance(m, Mask) else np.asarray(m)


def miou(
    pred: Union[Mask, np.ndarray],
    truth: Union[Mask, np.ndarray],
    num_classes: int,
) -> dict:
    """Per-class IoU plus the mean over classes present in either mask."""
    p = _mask_values(pred)
    t = _mask_values(truth)
    if p.shape != t.shape:
        raise ShapeMismatch(f"{p.shape} vs {t.shape}")
    per_class: dict[int, float] = {}
    for c in range(num_classes):
        pc = p == c
        tc = t == c
        union = int(np.count_nonzero(pc | tc))
        if union == 0:
            continue  # class absent from both
        per_class[c] = int(np.count_nonzero(pc & tc)) / union
    mean = sum(per_class.values()) / len(per_class) if per_class else 0.0
    return {"per_class": per_class, "mean": mean}


def binary_iou(pred: Union[Mask, np.ndarray], truth: Union[Mask, np.ndarray]) -> float:
    """IoU of the true pixels; two empty masks agree perfectly (1.0)."""
    p = _mask_values(pred).astype(bool)
    t = _mask_values(truth).astype(bool)
    if p.shape != t.shape:
        raise ShapeMismatch(f"{p.shape} vs {t.shape}")
    union = int(np.count_nonzero(p | t))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(p & t)) / union


@dataclass(frozen=True)
class ObbDetection:
    """Oriented box: center, size, rotation in radians within (-pi/2, pi/2]."""

    cx: float
    cy: float
    w: float
    h: float
    angle: float = 0.0
    class_id: int = 0
    score: Optional[float] = None

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise DegenerateBox(f"box sides must be positive, got {self.w}x{self.h}")


def obb_corners(box: ObbDetection) -> np.ndarray:
    """Corner coordinates (4x2), counterclockwise."""
    c, s = math.cos(box.angle), math.sin(box.angle)
    half = np.array(
        [[box.w / 2, box.h / 2], [-box.w / 2, box.h / 2],
         [-box.w / 2, -box.h / 2], [box.w / 2, -box.h / 2]]
    )
    rot = np.array([[c, -s], [s, c]])
    return half @ rot.T + np.array([box.cx, box.cy])


def _polygon_area(points: np.ndarray) -> float:
    if len(points) < 3:
        return 0.0
    x, y = points[:, 0], points[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _clip_polygon(subject: np.ndarray, clip: np.ndarray) -> np.ndarray:
    """Sutherland-Hodgman clip of a polygon by a convex CCW polygon."""
    output = [tuple(p) for p in subject]
    n = len(clip)
    for i in range(n):
        if not output:
            break
        a = clip[i]
        b = clip[(i + 1) % n]
        edge = (b[0] - a[0], b[1] - a[1])
        input_pts = output
        output = []

        def inside(p):
            return edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0]) >= -1e-12

        def intersection(p, q):
            dx, dy = q[0] - p[0], q[1] - p[1]
            denom = edge[0] * dy - edge[1] * dx
            if abs(denom) < 1e-15:
                return q
            t = (edge[0] * (a[1] - p[1]) - edge[1] * (a[0] - p[0])) / denom
            return (p[0] + t * dx, p[1] + t * dy)

        for j, current in enumerate(input_pts):
            previous = input_pts[j - 1]
            if inside(current):
                if not inside(previous):
                    output.append(intersection(previous, current))
                output.append(current)
            elif inside(previous):
                output.append(intersection(previous, current))
    return np.array(output) if output else np.empty((0, 2))


def obb_iou(a: ObbDetection, b: ObbDetection) -> float:
    """Rotated-rectangle IoU via convex polygon clipping; symmetric."""
    pa = obb_corners(a)
    pb = obb_corners(b)
    area_a = _polygon_area(pa)
    area_b = _polygon_area(pb)
    if area_a <= 0 or area_b <= 0:
        raise DegenerateBox("box with zero area")
    inter = _polygon_area(_clip_polygon(pa, pb))
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def _average_precision(flags: list[bool], total_truths: int) -> float:
    """All-point interpolated AP from score-ordered TP/FP flags."""
    if total_truths == 0:
        return 0.0
    tp = 0
    fp = 0
    recalls = [0.0]
    precisions = [1.0]
    for is_tp in flags:
        tp += 1 if is_tp else 0
        fp += 0 if is_tp else 1
        recalls.append(tp / total_truths)
        precisions.append(tp / (tp + fp))
    # monotone precision envelope from the right
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    ap = 0.0
    for i in range(1, len(recalls)):
        ap += (recalls[i] - recalls[i - 1]) * precisions[i]
    return ap


def map50(
    preds: Sequence[ObbDetection],
    truths: Sequence[ObbDetection],
    iou_threshold: float = 0.5,
) -> dict:
    """mAP at the given rotated-IoU threshold.

    Per class, predictions are matched greedily in descending score order
    to the unmatched truth with the highest IoU >= threshold. The mean
    covers classes with at least one truth; with no truths at all the
    mean is None (undefined), never 0.
    """
    classes = sorted({t.class_id for t in truths})
    per_class: dict[int, float] = {}
    for c in classes:
        class_truths = [t for t in truths if t.class_id == c]
        class_preds = sorted(
            (p for p in preds if p.class_id == c),
            key=lambda p: -(p.score if p.score is not None else 0.0),
        )
        matched: set[int] = set()
        flags: list[bool] = []
        for p in class_preds:
            best_iou = 0.0
            best_j = -1
            for j, t in enumerate(class_truths):
                if j in matched:
                    continue
                iou = obb_iou(p, t)
                if iou > best_iou:
                    best_iou = iou
                    best_j = j
            if best_j >= 0 and best_iou >= iou_threshold:
                matched.add(best_j)
                flags.append(True)
            else:
                flags.append(False)
        per_class[c] = _average_precision(flags, len(class_truths))
    mean = sum(per_class.values()) / len(per_class) if per_class else None
    return {"per_class": per_class, "mean": mean}
