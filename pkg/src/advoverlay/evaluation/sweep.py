"""Hyperparameter sweeps: one corpus run per value, everything else fixed."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from ..attack.config import CHANNEL_SOURCES, AttackConfig
from ..errors import ConfigurationError
from .corpus import MaskSpec, run_corpus
from .metrics import mean_box_increase, success_rate

SWEEP_PARAMETERS = ("xi", "alpha", "box_size", "channel", "aspect_ratio")


@dataclass(frozen=True)
class SweepConfig:
    varying_parameter: str
    values: tuple
    base: AttackConfig
    base_mask: MaskSpec
    iteration_budget: int
    corpus: str | Path

    def __post_init__(self):
        if self.varying_parameter not in SWEEP_PARAMETERS:
            raise ConfigurationError(
                f"varying_parameter must be one of {SWEEP_PARAMETERS}, "
                f"got {self.varying_parameter!r}"
            )
        if not self.values:
            raise ConfigurationError("sweep needs at least one value")
        if self.iteration_budget < 1:
            raise ConfigurationError("iteration_budget must be >= 1")


def aspect_rect(area: int, ratio: str) -> tuple[int, int]:
    """Width x height of a w:h rectangle holding the pixel count near `area`.

    Rounds the same way the reference aspect sweeps do, e.g. area 4096 with
    ratio 1:3 gives 37 x 111 (= 4108 pixels) and 1:1.5 gives 52 x 78.
    """
    try:
        a, b = (float(p) for p in str(ratio).split(":"))
    except ValueError as exc:
        raise ConfigurationError(f"aspect ratio must look like '1:3', got {ratio!r}") from exc
    if a <= 0 or b <= 0:
        raise ConfigurationError(f"aspect ratio terms must be positive, got {ratio!r}")
    w = round(math.sqrt(area * a / b))
    h = round(w * b / a)
    return max(1, w), max(1, h)


def configs_for_value(sweep: SweepConfig, value) -> tuple[AttackConfig, MaskSpec]:
    p = sweep.varying_parameter
    cfg, mask = sweep.base, sweep.base_mask
    if p == "xi":
        cfg = cfg.with_updates(xi=float(value))
    elif p == "alpha":
        cfg = cfg.with_updates(alpha=float(value))
    elif p == "box_size":
        size = int(value)
        mask = MaskSpec(width=size, height=size, placement=mask.placement)
    elif p == "channel":
        if value not in CHANNEL_SOURCES:
            raise ConfigurationError(f"unknown channel {value!r}")
        cfg = cfg.with_updates(monochrome=True, channel_source=str(value))
    elif p == "aspect_ratio":
        w, h = aspect_rect(sweep.base_mask.width * sweep.base_mask.height, value)
        mask = MaskSpec(width=w, height=h, placement=mask.placement)
    return cfg, mask


def run_sweep(sweep: SweepConfig, detector, seed: int = 0) -> list[tuple]:
    """Long-format rows: (parameter_value, iteration, success_rate, mean_box_increase)."""
    rows = []
    for value in sweep.values:
        cfg, mask_spec = configs_for_value(sweep, value)
        trials = run_corpus(
            sweep.corpus, cfg, mask_spec, detector, sweep.iteration_budget, seed=seed
        )
        for it in range(1, sweep.iteration_budget + 1):
            rows.append((
                value,
                it,
                success_rate(trials, it),
                mean_box_increase(trials, it),
            ))
    return rows
