"""Perturbation application: filter, patch and overlay variants."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..image import ImageTensor
from .mask import Mask


def _delta_as_channels(delta: np.ndarray, channels: int) -> np.ndarray:
    """Broadcast a monochrome H x W delta to all channels."""
    if delta.ndim == 2:
        return np.repeat(delta[:, :, None], channels, axis=2)
    return delta


def apply_perturbation(image: ImageTensor, mask: Mask, delta: np.ndarray,
                       application: str) -> ImageTensor:
    """Build the adversarial image, clipped elementwise to [0, 1].

    filter:  x + delta            (mask ignored)
    patch:   (1 - m) * x + m * delta
    overlay: x + m * delta
    """
    x = image.data
    if mask.height != image.height or mask.width != image.width:
        raise ShapeError(
            f"mask {mask.height}x{mask.width} does not match image "
            f"{image.height}x{image.width}"
        )
    d = _delta_as_channels(np.asarray(delta, dtype=np.float64), image.channels)
    if d.shape != x.shape:
        raise ShapeError(f"delta shape {d.shape} does not match image shape {x.shape}")
    if application == "filter":
        out = x + d
    elif application == "patch":
        m = mask.as_float()[:, :, None]
        out = (1.0 - m) * x + m * d
    elif application == "overlay":
        m = mask.as_float()[:, :, None]
        out = x + m * d
    else:
        raise ValueError(f"unknown application mode {application!r}")
    return ImageTensor(np.clip(out, 0.0, 1.0))
