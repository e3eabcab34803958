"""Binary perturbation masks built from rectangles or 1-bit PNGs."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import ShapeError


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class Mask:
    """H x W binary matrix selecting perturbable pixels."""

    bits: np.ndarray

    def __post_init__(self):
        b = self.bits
        if b.ndim != 2:
            raise ShapeError(f"mask must be 2-D, got shape {b.shape}")
        if b.dtype != np.uint8:
            object.__setattr__(self, "bits", b.astype(np.uint8))
        vals = np.unique(self.bits)
        if not np.isin(vals, (0, 1)).all():
            raise ValueError("mask elements must be exactly 0 or 1")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def pixel_count(self) -> int:
        return int(self.bits.sum())

    def as_float(self) -> np.ndarray:
        return self.bits.astype(np.float64)


def build_mask(rects, height: int, width: int) -> Mask:
    """Union of integer rectangles; overlapping rects are idempotent.

    Rectangles are clipped to the image bounds; rects that are empty after
    clipping are ignored.
    """
    bits = np.zeros((height, width), dtype=np.uint8)
    for r in rects:
        if not isinstance(r, Rect):
            r = Rect(*r)
        x0 = max(0, r.x)
        y0 = max(0, r.y)
        x1 = min(width, r.x + r.w)
        y1 = min(height, r.y + r.h)
        if x1 <= x0 or y1 <= y0:
            continue
        bits[y0:y1, x0:x1] = 1
    return Mask(bits)


def mask_to_png(mask: Mask, path: str | Path) -> None:
    Image.fromarray(mask.bits * np.uint8(255)).convert("1").save(path, format="PNG")


def mask_from_png(path: str | Path) -> Mask:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("1"), dtype=np.uint8)
    return Mask(arr)


def rects_to_json(rects) -> str:
    """Serialize rects with the wire protocol's mask_update schema."""
    payload = {"rects": [{"x": r.x, "y": r.y, "w": r.w, "h": r.h}
                         for r in (r if isinstance(r, Rect) else Rect(*r) for r in rects)]}
    return json.dumps(payload, sort_keys=True)


def rects_from_json(text: str) -> list[Rect]:
    payload = json.loads(text)
    return [Rect(int(r["x"]), int(r["y"]), int(r["w"]), int(r["h"]))
            for r in payload["rects"]]
