"""Corpus runs: one attack per image with a fresh perturbation each time."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from ..attack.config import AttackConfig
from ..attack.loop import run_attack
from ..attack.mask import Mask, Rect, build_mask
from ..detector.decode import DEFAULT_CONF_THRESHOLD, DEFAULT_IOU_THRESHOLD
from ..errors import ConfigurationError
from ..image import ImageTensor, letterbox, load_image
from ..rng import Xoshiro256, derive_seed
from .metrics import TrialResult

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class MaskSpec:
    """Where the perturbation rectangle goes on each corpus image."""

    width: int
    height: int
    placement: str = "centered"  # centered | random

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigurationError("mask dimensions must be positive")
        if self.placement not in ("centered", "random"):
            raise ConfigurationError(f"unknown placement {self.placement!r}")

    def build(self, side: int, seed: int = 0, image_index: int = 0) -> Mask:
        w = min(self.width, side)
        h = min(self.height, side)
        if self.placement == "centered":
            x, y = (side - w) // 2, (side - h) // 2
        else:
            rng = Xoshiro256(derive_seed(seed, image_index))
            x = rng.randint(0, side - w)
            y = rng.randint(0, side - h)
        return build_mask([Rect(x, y, w, h)], side, side)


def list_corpus_images(corpus_dir: str | Path) -> list[Path]:
    d = Path(corpus_dir)
    if not d.is_dir():
        raise ValueError(f"corpus directory not found: {d}")
    return sorted(p for p in d.iterdir()
                  if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def run_corpus(corpus_dir: str | Path, config: AttackConfig, mask_spec: MaskSpec,
               detector, iteration_budget: int, seed: int = 0,
               conf_threshold: float = DEFAULT_CONF_THRESHOLD,
               iou_threshold: float = DEFAULT_IOU_THRESHOLD) -> list[TrialResult]:
    """Attack every decodable image in lexicographic order.

    Each image is letterboxed to the detector input side and attacked from a
    fresh zero perturbation for the full budget (no early stop, so the
    per-iteration curves are complete).
    """
    paths = list_corpus_images(corpus_dir)
    if not paths:
        raise ValueError(f"no images (png/jpeg) in {corpus_dir}")
    config = config.with_updates(iterations=iteration_budget)

    trials: list[TrialResult] = []
    failures = 0
    for index, path in enumerate(paths):
        try:
            image = letterbox(load_image(path), detector.input_side)
        except Exception as exc:  # unreadable file: skip, keep going
            log.warning("skipping unreadable image %s: %s", path.name, exc)
            failures += 1
            continue
        mask = mask_spec.build(detector.input_side, seed=seed, image_index=index)
        _, report = run_attack(
            image, mask, config, detector,
            stop_on_success=False,
            conf_threshold=conf_threshold,
            iou_threshold=iou_threshold,
        )
        trials.append(TrialResult(
            image_id=path.name,
            benign_boxes=report.benign_box_count,
            per_iteration_boxes=tuple(count for _, count in report.per_iteration),
        ))
    if not trials:
        raise ValueError(f"all {failures} images in {corpus_dir} were unreadable")
    return trials
