"""Iterative overlay attack: sign/averaged-gradient ascent on a persistent
perturbation, with l-infinity clipping and warm starts across frames."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..detector.decode import DEFAULT_CONF_THRESHOLD, DEFAULT_IOU_THRESHOLD
from ..errors import ShapeError
from ..image import ImageTensor
from .config import AttackConfig
from .losses import make_loss
from .mask import Mask
from .overlay import apply_perturbation

_CHANNEL_INDEX = {"red": 0, "green": 1, "blue": 2}


@dataclass
class AttackState:
    """Persistent perturbation plus bookkeeping. Single-owner mutable."""

    delta: np.ndarray  # (H, W, C) polychrome, (H, W) monochrome
    iterations_done: int = 0
    loss_history: list[float] = field(default_factory=list)

    @classmethod
    def fresh(cls, height: int, width: int, channels: int = 3,
              monochrome: bool = False) -> "AttackState":
        shape = (height, width) if monochrome else (height, width, channels)
        return cls(delta=np.zeros(shape, dtype=np.float64))

    @property
    def monochrome(self) -> bool:
        return self.delta.ndim == 2

    def clip_to(self, xi: float) -> None:
        """Re-clip delta to +-xi/255, e.g. after the bound was lowered."""
        bound = xi / 255.0
        np.clip(self.delta, -bound, bound, out=self.delta)

    def zero_outside(self, mask: Mask) -> None:
        """Zero delta outside the mask, e.g. after the mask shrank."""
        m = mask.as_float()
        self.delta *= m if self.monochrome else m[:, :, None]


@dataclass
class AttackReport:
    iterations_used: int
    success: bool
    benign_box_count: int
    adversarial_box_count: int
    final_loss: float
    per_iteration: list[tuple[float, int]]  # (loss, post-NMS box count)
    success_in_mask: bool  # stricter variant: fabricated box centered in the mask

    @property
    def first_success_iteration(self) -> int | None:
        for i, (_, count) in enumerate(self.per_iteration):
            if count > self.benign_box_count:
                return i + 1
        return None


def _check_step_inputs(state: AttackState, image: ImageTensor, mask: Mask,
                       config: AttackConfig) -> None:
    if mask.height != image.height or mask.width != image.width:
        raise ShapeError("mask dimensions do not match image")
    if config.monochrome:
        if image.channels != 3:
            raise ShapeError("monochrome attack requires a 3-channel image")
        if state.delta.shape != (image.height, image.width):
            raise ShapeError(
                f"monochrome state delta {state.delta.shape} does not match "
                f"image {image.height}x{image.width}"
            )
    else:
        if state.delta.shape != image.data.shape:
            raise ShapeError(
                f"state delta {state.delta.shape} does not match image {image.data.shape}"
            )


def attack_step(state: AttackState, image: ImageTensor, mask: Mask,
                config: AttackConfig, detector) -> tuple[AttackState, ImageTensor]:
    """One iteration: gradient at the applied image, masked ascent, clip.

    Polychrome: delta += (alpha/255) * sign(grad). Monochrome: delta +=
    (alpha/255) * g where g is the chosen channel's gradient or the RGB mean
    (unsigned, as the update rule is stated; monochrome_signed applies
    sign() instead). Gradients outside the mask are zeroed before the update
    except in filter mode, where the mask plays no role at all.
    """
    _check_step_inputs(state, image, mask, config)
    config.check_target_for(detector.num_classes)
    loss = make_loss(config.mode, config.target_class)

    adv = apply_perturbation(image, mask, state.delta, config.application)
    value, grad = detector.loss_gradient(adv, loss)

    if config.application != "filter":
        grad = grad * mask.as_float()[:, :, None]

    alpha = config.alpha_unit
    if config.monochrome:
        src = config.channel_source
        g = grad.mean(axis=2) if src == "average" else grad[:, :, _CHANNEL_INDEX[src]]
        if config.monochrome_signed:
            g = np.sign(g)
        state.delta += alpha * g
    else:
        state.delta += alpha * np.sign(grad)

    state.clip_to(config.xi)
    state.iterations_done += 1
    state.loss_history.append(value)

    adv_after = apply_perturbation(image, mask, state.delta, config.application)
    return state, adv_after


def _count_in_mask(detections, mask: Mask) -> int:
    n = 0
    for d in detections:
        col = min(max(int(d.b_x), 0), mask.width - 1)
        row = min(max(int(d.b_y), 0), mask.height - 1)
        n += int(mask.bits[row, col])
    return n


def run_attack(image: ImageTensor, mask: Mask, config: AttackConfig, detector,
               stop_on_success: bool = False,
               conf_threshold: float = DEFAULT_CONF_THRESHOLD,
               iou_threshold: float = DEFAULT_IOU_THRESHOLD,
               state: AttackState | None = None) -> tuple[AttackState, AttackReport]:
    """Run up to config.iterations attack steps against one frame.

    After each step both the benign and adversarial outputs are decoded and
    NMS-filtered; success means the adversarial box count exceeded the
    benign count at some recorded iteration. An existing state may be passed
    in to warm-start (streaming); by default a fresh zero perturbation is
    used.
    """
    benign_dets = detector.detect(image, conf_threshold, iou_threshold)
    benign_count = len(benign_dets)
    benign_in_mask = _count_in_mask(benign_dets, mask)

    if state is None:
        state = AttackState.fresh(image.height, image.width, image.channels,
                                  config.monochrome)

    per_iteration: list[tuple[float, int]] = []
    success = False
    success_in_mask = False
    adv_count = benign_count
    for _ in range(config.iterations):
        state, adv = attack_step(state, image, mask, config, detector)
        adv_dets = detector.detect(adv, conf_threshold, iou_threshold)
        adv_count = len(adv_dets)
        per_iteration.append((state.loss_history[-1], adv_count))
        if adv_count > benign_count:
            success = True
        if _count_in_mask(adv_dets, mask) > benign_in_mask:
            success_in_mask = True
        if stop_on_success and success:
            break

    report = AttackReport(
        iterations_used=len(per_iteration),
        success=success,
        benign_box_count=benign_count,
        adversarial_box_count=adv_count,
        final_loss=per_iteration[-1][0],
        per_iteration=per_iteration,
        success_in_mask=success_in_mask,
    )
    return state, report
