"""Synthetic shape scenes for training and evaluating the toy detector.

Each scene is a noisy gray background with 1..3 bright shapes. Class ids
are 1-based like everywhere else: 1=circle, 2=square, 3=triangle.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .image import ImageTensor, save_png
from .rng import Xoshiro256, derive_seed

CLASS_NAMES = ("circle", "square", "triangle")

# Base colors per class; hue is jittered per object.
_BASE_COLORS = {
    1: (0.85, 0.25, 0.20),
    2: (0.20, 0.80, 0.30),
    3: (0.25, 0.35, 0.90),
}


@dataclass(frozen=True)
class SceneObject:
    class_id: int  # 1-based
    cx: float
    cy: float
    w: float
    h: float


def _shape_mask(class_id: int, side: int, cx: float, cy: float, size: float) -> np.ndarray:
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    half = size / 2.0
    if class_id == 1:
        return (xx - cx) ** 2 + (yy - cy) ** 2 <= half**2
    if class_id == 2:
        return (np.abs(xx - cx) <= half) & (np.abs(yy - cy) <= half)
    # Upward triangle inscribed in the size x size box.
    top = cy - half
    bottom = cy + half
    inside_y = (yy >= top) & (yy <= bottom)
    frac = np.clip((yy - top) / max(size, 1e-9), 0.0, 1.0)
    return inside_y & (np.abs(xx - cx) <= frac * half)


def make_scene(seed: int, side: int = 128, min_objects: int = 1,
               max_objects: int = 3) -> tuple[ImageTensor, list[SceneObject]]:
    """Deterministic scene for a seed: background noise plus colored shapes."""
    rng = Xoshiro256(seed)
    base = rng.uniform(0.25, 0.45)
    noise_rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 0xB6)))
    img = np.clip(base + noise_rng.normal(0.0, 0.02, size=(side, side, 3)), 0.05, 0.95)

    objects: list[SceneObject] = []
    n = rng.randint(min_objects, max_objects)
    for _ in range(n):
        class_id = rng.randint(1, len(CLASS_NAMES))
        size = rng.uniform(24.0, min(64.0, side / 2))
        margin = size / 2 + 2
        cx = rng.uniform(margin, side - margin)
        cy = rng.uniform(margin, side - margin)
        color = np.array(_BASE_COLORS[class_id])
        jitter = np.array([rng.uniform(-0.08, 0.08) for _ in range(3)])
        color = np.clip(color + jitter, 0.05, 0.95)
        mask = _shape_mask(class_id, side, cx, cy, size)
        img[mask] = color
        objects.append(SceneObject(class_id=class_id, cx=cx, cy=cy, w=size, h=size))
    return ImageTensor(img), objects


def write_corpus(directory: str | Path, count: int, seed: int, side: int = 128) -> list[Path]:
    """Write `count` deterministic scene PNGs named img_###.png."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(count):
        image, _ = make_scene(derive_seed(seed, i), side=side)
        path = directory / f"img_{i:03d}.png"
        save_png(image, path)
        paths.append(path)
    return paths
