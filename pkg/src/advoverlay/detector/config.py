"""Multi-scale detector head configuration."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigurationError


@dataclass(frozen=True)
class Scale:
    grid_size: int
    stride: int
    anchors: tuple[tuple[float, float], ...]  # (width, height) in pixels


@dataclass(frozen=True)
class ScaleConfig:
    """Grid sizes, strides and anchors for every prediction scale.

    Candidate layout is fixed: scales in declaration order, then grid row,
    grid column, anchor index.
    """

    scales: tuple[Scale, ...]
    boxes_per_cell: int
    num_classes: int

    def __post_init__(self):
        if not self.scales:
            raise ConfigurationError("at least one scale required")
        if self.boxes_per_cell < 1:
            raise ConfigurationError("boxes_per_cell must be >= 1")
        if self.num_classes < 1:
            raise ConfigurationError("num_classes must be >= 1")
        for sc in self.scales:
            if len(sc.anchors) != self.boxes_per_cell:
                raise ConfigurationError(
                    f"scale S={sc.grid_size} has {len(sc.anchors)} anchors, "
                    f"expected boxes_per_cell={self.boxes_per_cell}"
                )
            if sc.grid_size < 1 or sc.stride < 1:
                raise ConfigurationError("grid_size and stride must be positive")

    @property
    def values_per_box(self) -> int:
        return self.num_classes + 5

    @property
    def candidate_count(self) -> int:
        return sum(sc.grid_size * sc.grid_size for sc in self.scales) * self.boxes_per_cell

    @property
    def max_stride(self) -> int:
        return max(sc.stride for sc in self.scales)

    def validate_input_side(self, input_side: int) -> None:
        for sc in self.scales:
            if sc.grid_size * sc.stride != input_side:
                raise ConfigurationError(
                    f"scale S={sc.grid_size} * stride={sc.stride} != input side {input_side}"
                )
        for sc in self.scales:
            # Trunk halves resolution per layer, so every grid must be
            # input_side / 2**k for some k >= 1.
            ratio = input_side // sc.grid_size
            if sc.grid_size * ratio != input_side or ratio < 2 or ratio & (ratio - 1):
                raise ConfigurationError(
                    f"grid {sc.grid_size} is not input_side / 2**k for input {input_side}"
                )

    def head_shape(self, scale_index: int) -> tuple[int, int, int, int]:
        s = self.scales[scale_index].grid_size
        return (s, s, self.boxes_per_cell, self.values_per_box)


def make_scale_config(
    entries: list[tuple[int, int, list[tuple[float, float]]]],
    boxes_per_cell: int,
    num_classes: int,
) -> ScaleConfig:
    scales = tuple(Scale(s, stride, tuple((float(w), float(h)) for w, h in anchors))
                   for s, stride, anchors in entries)
    return ScaleConfig(scales=scales, boxes_per_cell=boxes_per_cell, num_classes=num_classes)


# COCO-style reference layout: 416 input, three scales, three anchors each.
FULL_INPUT_SIDE = 416

# Toy layout used for the trained fixture and the CLI default: 128 input,
# two scales, two anchors each, three classes.
TOY_INPUT_SIDE = 128


def full_scale_config() -> ScaleConfig:
    return make_scale_config(
        [
            (13, 32, [(116, 90), (156, 198), (373, 326)]),
            (26, 16, [(30, 61), (62, 45), (59, 119)]),
            (52, 8, [(10, 13), (16, 30), (33, 23)]),
        ],
        boxes_per_cell=3,
        num_classes=80,
    )


def toy_scale_config() -> ScaleConfig:
    return make_scale_config(
        [
            (8, 16, [(44, 44), (72, 72)]),
            (16, 8, [(20, 20), (32, 32)]),
        ],
        boxes_per_cell=2,
        num_classes=3,
    )
