"""Grid/anchor box decoding and non-maximum suppression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit as sigmoid

from ..errors import ConfigurationError
from .config import ScaleConfig
from .network import RawPrediction

# exp() argument clamp; adversarially-driven t_w/t_h logits would otherwise overflow.
EXP_CLAMP = 10.0

DEFAULT_CONF_THRESHOLD = 0.5
DEFAULT_IOU_THRESHOLD = 0.45


@dataclass(frozen=True)
class Detection:
    """A decoded box. class_id is 1-based; (b_x, b_y) is the box center in pixels."""

    b_x: float
    b_y: float
    b_w: float
    b_h: float
    class_id: int
    objectness: float
    class_prob: float
    score: float
    index: int  # global candidate index, used for deterministic tie-breaks

    def corners(self) -> tuple[float, float, float, float]:
        return (
            self.b_x - self.b_w / 2.0,
            self.b_y - self.b_h / 2.0,
            self.b_x + self.b_w / 2.0,
            self.b_y + self.b_h / 2.0,
        )


def decode(raw: RawPrediction, config: ScaleConfig, conf_threshold: float) -> list[Detection]:
    """Emit one Detection per candidate whose sigma(c) * max_j sigma(p_j) > threshold.

    Box transform: b_x = (sigma(t_x) + col) * stride, b_w = anchor_w * exp(t_w),
    analogously for y/h. Class is the argmax class probability, ties to the
    lowest index. Output preserves candidate order (scale, row, col, anchor).
    """
    if not 0.0 <= conf_threshold <= 1.0:
        raise ConfigurationError(f"conf_threshold must be in [0, 1], got {conf_threshold}")
    detections: list[Detection] = []
    base_index = 0
    for scale, logits in zip(config.scales, raw.scales):
        s = scale.grid_size
        b = config.boxes_per_cell
        obj = sigmoid(logits[..., 4])
        probs = sigmoid(logits[..., 5:])
        class_idx = probs.argmax(axis=-1)
        class_prob = np.take_along_axis(probs, class_idx[..., None], axis=-1)[..., 0]
        score = obj * class_prob
        keep = score > conf_threshold
        anchors = np.asarray(scale.anchors)
        for row, col, a in zip(*np.nonzero(keep)):
            t_x, t_y, t_w, t_h = logits[row, col, a, :4]
            detections.append(
                Detection(
                    b_x=float((sigmoid(t_x) + col) * scale.stride),
                    b_y=float((sigmoid(t_y) + row) * scale.stride),
                    b_w=float(anchors[a, 0] * np.exp(min(t_w, EXP_CLAMP))),
                    b_h=float(anchors[a, 1] * np.exp(min(t_h, EXP_CLAMP))),
                    class_id=int(class_idx[row, col, a]) + 1,
                    objectness=float(obj[row, col, a]),
                    class_prob=float(class_prob[row, col, a]),
                    score=float(score[row, col, a]),
                    index=base_index + int((row * s + col) * b + a),
                )
            )
        base_index += s * s * b
    return detections


def iou(a: Detection, b: Detection) -> float:
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.b_w * a.b_h + b.b_w * b.b_h - inter
    return inter / union


def nms(detections: list[Detection], iou_threshold: float) -> list[Detection]:
    """Greedy class-wise suppression, deterministic.

    Sorted by score descending (ties keep candidate order); a detection
    survives iff its IoU with every kept detection of the same class is
    <= iou_threshold. Output is in keep order (i.e. score order).
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ConfigurationError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    order = sorted(range(len(detections)),
                   key=lambda i: (-detections[i].score, detections[i].index))
    kept: list[Detection] = []
    for i in order:
        d = detections[i]
        if all(iou(d, k) <= iou_threshold for k in kept if k.class_id == d.class_id):
            kept.append(d)
    return kept
