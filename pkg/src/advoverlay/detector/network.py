"""Reference detector: a small fully-convolutional multi-scale head network.

Trunk: stride-2 3x3 convolutions with leaky ReLU, halving resolution down to
the coarsest configured grid. Each scale gets a 1x1 prediction head; scales
finer than the coarsest see their trunk feature concatenated with the
nearest-neighbor upsampled feature of the next-coarser level.

Forward, input gradients and parameter gradients are exact (manual reverse
mode over layers.py); no autodiff framework involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from ..errors import ConfigurationError, ShapeError
from ..image import ImageTensor
from ..rng import Xoshiro256
from .config import ScaleConfig
from .layers import (
    conv2d_backward,
    conv2d_forward,
    leaky_relu_backward,
    leaky_relu_forward,
    upsample2x_backward,
    upsample2x_forward,
)

WEIGHT_INIT_BOUND = 0.1
CHANNEL_CAP_FACTOR = 8


@dataclass(frozen=True)
class RawPrediction:
    """Raw (pre-sigmoid) logits, one (S, S, B, K+5) tensor per scale.

    Last-axis layout: [t_x, t_y, t_w, t_h, c, p_1 .. p_K].
    """

    scales: tuple[np.ndarray, ...]

    @property
    def num_classes(self) -> int:
        return self.scales[0].shape[-1] - 5

    @property
    def candidate_count(self) -> int:
        return sum(t.shape[0] * t.shape[1] * t.shape[2] for t in self.scales)

    def zeros_like_grads(self) -> list[np.ndarray]:
        return [np.zeros_like(t) for t in self.scales]


# A loss is any callable mapping RawPrediction to (value, per-scale grads).
LossFn = Callable[[RawPrediction], tuple[float, list[np.ndarray]]]


def _channel_plan(base_channels: int, depth: int) -> list[int]:
    cap = base_channels * CHANNEL_CAP_FACTOR
    return [min(base_channels << l, cap) for l in range(depth)]


def _scale_levels(config: ScaleConfig, input_side: int) -> tuple[int, list[int]]:
    """Trunk depth plus the trunk level index feeding each scale."""
    depth = 0
    side = input_side
    coarsest = min(sc.grid_size for sc in config.scales)
    while side > coarsest:
        side //= 2
        depth += 1
    levels = []
    for sc in config.scales:
        ratio = input_side // sc.grid_size
        levels.append(ratio.bit_length() - 2)  # log2(ratio) - 1
    return depth, levels


@dataclass(frozen=True)
class DetectorWeights:
    """Immutable parameter set. Identical construction args give bit-identical arrays."""

    config: ScaleConfig
    input_side: int
    in_channels: int
    base_channels: int
    seed: int
    trunk: tuple[tuple[np.ndarray, np.ndarray], ...]
    heads: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        for w, b in (*self.trunk, *self.heads):
            w.flags.writeable = False
            b.flags.writeable = False

    @property
    def depth(self) -> int:
        return len(self.trunk)

    def parameter_arrays(self) -> list[np.ndarray]:
        """All tensors in declaration order (trunk then heads, weight then bias)."""
        out = []
        for w, b in self.trunk:
            out.extend([w, b])
        for w, b in self.heads:
            out.extend([w, b])
        return out


def parameter_shapes(config: ScaleConfig, input_side: int,
                     in_channels: int = 3, base_channels: int = 8):
    """Shapes of every parameter tensor, in declaration order."""
    depth, levels = _scale_levels(config, input_side)
    channels = _channel_plan(base_channels, depth)
    trunk_shapes = []
    prev = in_channels
    for l in range(depth):
        trunk_shapes.append(((channels[l], prev, 3, 3), (channels[l],)))
        prev = channels[l]
    head_shapes = []
    out_per_cell = config.boxes_per_cell * config.values_per_box
    for li in levels:
        if li == depth - 1:
            feat_ch = channels[li]
        else:
            feat_ch = channels[li] + channels[li + 1]
        head_shapes.append(((out_per_cell, feat_ch, 1, 1), (out_per_cell,)))
    return trunk_shapes, head_shapes, levels


def init_detector(config: ScaleConfig, input_side: int, seed: int,
                  in_channels: int = 3, base_channels: int = 8) -> DetectorWeights:
    """Deterministic weight init: uniform [-0.1, 0.1] weights, zero biases."""
    config.validate_input_side(input_side)
    if in_channels not in (1, 3):
        raise ConfigurationError(f"in_channels must be 1 or 3, got {in_channels}")
    trunk_shapes, head_shapes, _ = parameter_shapes(
        config, input_side, in_channels, base_channels
    )
    rng = Xoshiro256(seed)

    def draw(shape):
        return rng.uniform_array(shape, -WEIGHT_INIT_BOUND, WEIGHT_INIT_BOUND)

    trunk = tuple((draw(ws), np.zeros(bs, dtype=np.float64)) for ws, bs in trunk_shapes)
    heads = tuple((draw(ws), np.zeros(bs, dtype=np.float64)) for ws, bs in head_shapes)
    return DetectorWeights(
        config=config,
        input_side=input_side,
        in_channels=in_channels,
        base_channels=base_channels,
        seed=seed,
        trunk=trunk,
        heads=heads,
    )


class ForwardPass:
    """One forward evaluation with enough cached state for exact backprop."""

    def __init__(self, weights: DetectorWeights, x: np.ndarray):
        self.weights = weights
        depth, levels = _scale_levels(weights.config, weights.input_side)
        self.levels = levels
        self.depth = depth

        self._conv_caches = []
        self._preacts = []
        feats = []
        t = x
        for w, b in weights.trunk:
            pre, cache = conv2d_forward(t, w, b, stride=2, pad=1)
            self._conv_caches.append(cache)
            self._preacts.append(pre)
            t, _ = leaky_relu_forward(pre)
            feats.append(t)
        self._feats = feats

        self._head_caches = []
        self._skip_channels = []
        raw_scales = []
        cfg = weights.config
        for i, li in enumerate(levels):
            if li == depth - 1:
                feat = feats[li]
                self._skip_channels.append(None)
            else:
                up = upsample2x_forward(feats[li + 1])
                feat = np.concatenate([feats[li], up], axis=3)
                self._skip_channels.append(feats[li].shape[3])
            hw, hb = weights.heads[i]
            out, cache = conv2d_forward(feat, hw, hb, stride=1, pad=0)
            self._head_caches.append(cache)
            s = cfg.scales[i].grid_size
            raw_scales.append(
                out.reshape(s, s, cfg.boxes_per_cell, cfg.values_per_box)
            )
        self.raw = RawPrediction(scales=tuple(raw_scales))

    def backward(self, grad_scales, want_param_grads: bool = False):
        """Backprop grads on the raw logits to the input (and optionally params).

        Returns (dinput, param_grads) where param_grads mirrors
        DetectorWeights.parameter_arrays() order, or None.
        """
        w = self.weights
        cfg = w.config
        dfeats = [np.zeros_like(f) for f in self._feats]
        head_param_grads = []
        for i, li in enumerate(self.levels):
            s = cfg.scales[i].grid_size
            dhead = np.asarray(grad_scales[i]).reshape(
                1, s, s, cfg.boxes_per_cell * cfg.values_per_box
            )
            dfeat, dwh, dbh = conv2d_backward(
                dhead, self._head_caches[i], w.heads[i][0], want_param_grads
            )
            head_param_grads.append((dwh, dbh))
            skip_ch = self._skip_channels[i]
            if skip_ch is None:
                dfeats[li] += dfeat
            else:
                dfeats[li] += dfeat[:, :, :, :skip_ch]
                dfeats[li + 1] += upsample2x_backward(dfeat[:, :, :, skip_ch:])

        trunk_param_grads = [None] * self.depth
        dinput = None
        for l in range(self.depth - 1, -1, -1):
            d = leaky_relu_backward(dfeats[l], self._preacts[l])
            dx, dwl, dbl = conv2d_backward(
                d, self._conv_caches[l], w.trunk[l][0], want_param_grads
            )
            trunk_param_grads[l] = (dwl, dbl)
            if l == 0:
                dinput = dx
            else:
                dfeats[l - 1] += dx

        param_grads = None
        if want_param_grads:
            param_grads = []
            for dwl, dbl in trunk_param_grads:
                param_grads.extend([dwl, dbl])
            for dwh, dbh in head_param_grads:
                param_grads.extend([dwh, dbh])
        return dinput, param_grads


def _check_image(weights: DetectorWeights, image: ImageTensor) -> np.ndarray:
    if image.height != weights.input_side or image.width != weights.input_side:
        raise ShapeError(
            f"image is {image.height}x{image.width}, detector expects "
            f"{weights.input_side}x{weights.input_side}"
        )
    if image.channels != weights.in_channels:
        raise ShapeError(
            f"image has {image.channels} channels, detector expects {weights.in_channels}"
        )
    return image.data[None, :, :, :]


def forward(weights: DetectorWeights, image: ImageTensor) -> RawPrediction:
    """Raw logits for one image. Pure function of (weights, image)."""
    return ForwardPass(weights, _check_image(weights, image)).raw


def input_gradient(weights: DetectorWeights, image: ImageTensor, loss: LossFn) -> np.ndarray:
    """Exact d(loss(forward(image)))/d(image), shape (H, W, C)."""
    fp = ForwardPass(weights, _check_image(weights, image))
    _, grads = _eval_loss(loss, fp.raw)
    dinput, _ = fp.backward(grads)
    return dinput[0]


def _eval_loss(loss, raw: RawPrediction):
    if hasattr(loss, "value_and_grad"):
        return loss.value_and_grad(raw)
    return loss(raw)


class DetectorProtocol(Protocol):
    """What the attack, evaluation and server layers need from a detector.

    Adapters for full-scale pretrained models only have to satisfy this.
    """

    input_side: int
    in_channels: int
    num_classes: int

    def predict(self, image: ImageTensor) -> RawPrediction: ...

    def loss_gradient(self, image: ImageTensor, loss: LossFn) -> tuple[float, np.ndarray]: ...

    def detect(self, image: ImageTensor, conf_threshold: float = 0.5,
               iou_threshold: float = 0.45) -> list: ...


class Detector:
    """Reference DetectorProtocol implementation around DetectorWeights."""

    def __init__(self, weights: DetectorWeights):
        self.weights = weights
        self.input_side = weights.input_side
        self.in_channels = weights.in_channels
        self.num_classes = weights.config.num_classes
        self.scale_config = weights.config

    def predict(self, image: ImageTensor) -> RawPrediction:
        return forward(self.weights, image)

    def loss_gradient(self, image: ImageTensor, loss: LossFn) -> tuple[float, np.ndarray]:
        fp = ForwardPass(self.weights, _check_image(self.weights, image))
        value, grads = _eval_loss(loss, fp.raw)
        dinput, _ = fp.backward(grads)
        return value, dinput[0]

    def detect(self, image: ImageTensor, conf_threshold: float = 0.5,
               iou_threshold: float = 0.45):
        from .decode import decode, nms

        raw = self.predict(image)
        return nms(decode(raw, self.scale_config, conf_threshold), iou_threshold)
