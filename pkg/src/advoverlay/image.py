"""Image container and I/O helpers.

Images live in [0, 1] as float64 arrays with shape (H, W, C), C in {1, 3}.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ShapeError


@dataclass(frozen=True)
class ImageTensor:
    """A validated H x W x C image with values in [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] not in (1, 3):
            raise ShapeError(f"expected (H, W, C) with C in {{1, 3}}, got {d.shape}")
        if d.shape[0] <= 0 or d.shape[1] <= 0:
            raise ShapeError(f"empty image {d.shape}")
        if d.dtype != np.float64:
            object.__setattr__(self, "data", d.astype(np.float64))
        lo, hi = float(self.data.min()), float(self.data.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"pixel values outside [0, 1]: min={lo}, max={hi}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def from_array(cls, arr: np.ndarray, clip: bool = False) -> "ImageTensor":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if clip:
            arr = np.clip(arr, 0.0, 1.0)
        return cls(arr)

    @classmethod
    def full(cls, height: int, width: int, value: float, channels: int = 3) -> "ImageTensor":
        return cls(np.full((height, width, channels), value, dtype=np.float64))


def load_image(path: str | Path) -> ImageTensor:
    """Load a PNG/JPEG file as an RGB image in [0, 1]."""
    with Image.open(path) as im:
        rgb = im.convert("RGB")
        arr = np.asarray(rgb, dtype=np.float64) / 255.0
    return ImageTensor(arr)


def save_png(image: ImageTensor, path: str | Path) -> None:
    arr = np.clip(np.rint(image.data * 255.0), 0, 255).astype(np.uint8)
    if arr.shape[2] == 1:
        pil = Image.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(arr, mode="RGB")
    pil.save(path, format="PNG")


def letterbox(image: ImageTensor, side: int, pad_value: float = 0.5) -> ImageTensor:
    """Resize (bilinear) onto a side x side canvas, preserving aspect ratio.

    The image is scaled so its longer edge equals `side` and centered on a
    gray canvas. Resampling runs per channel in float32 so no uint8
    quantization sneaks into the attack substrate.
    """
    h, w = image.height, image.width
    scale = side / max(h, w)
    new_h = max(1, round(h * scale))
    new_w = max(1, round(w * scale))
    channels = []
    for c in range(image.channels):
        plane = Image.fromarray(image.data[:, :, c].astype(np.float32), mode="F")
        resized = plane.resize((new_w, new_h), resample=Image.BILINEAR)
        channels.append(np.asarray(resized, dtype=np.float64))
    resized_arr = np.clip(np.stack(channels, axis=2), 0.0, 1.0)
    canvas = np.full((side, side, image.channels), pad_value, dtype=np.float64)
    top = (side - new_h) // 2
    left = (side - new_w) // 2
    canvas[top : top + new_h, left : left + new_w, :] = resized_arr
    return ImageTensor(canvas)
