"""Binary weights file: magic "ADVD", version, config block, f32 tensors.

All integers and floats are little-endian. Tensors appear in declaration
order (trunk convs then heads, weight before bias) as float32.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .config import Scale, ScaleConfig
from .network import DetectorWeights, parameter_shapes

MAGIC = b"ADVD"
FORMAT_VERSION = 1


class WeightsFormatError(ValueError):
    pass


def save_weights(weights: DetectorWeights, path: str | Path) -> None:
    cfg = weights.config
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    parts.append(
        struct.pack(
            "<IIIIIIQ",
            weights.input_side,
            weights.in_channels,
            weights.base_channels,
            len(cfg.scales),
            cfg.boxes_per_cell,
            cfg.num_classes,
            weights.seed & (2**64 - 1),
        )
    )
    for sc in cfg.scales:
        parts.append(struct.pack("<II", sc.grid_size, sc.stride))
        for w, h in sc.anchors:
            parts.append(struct.pack("<ff", w, h))
    for tensor in weights.parameter_arrays():
        parts.append(np.ascontiguousarray(tensor, dtype="<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WeightsFormatError("truncated weights file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_weights(path: str | Path) -> DetectorWeights:
    r = _Reader(Path(path).read_bytes())
    if r.take(4) != MAGIC:
        raise WeightsFormatError("bad magic; not an ADVD weights file")
    (version,) = r.unpack("<I")
    if version != FORMAT_VERSION:
        raise WeightsFormatError(f"unsupported format version {version}")
    input_side, in_channels, base_channels, n_scales, bpc, num_classes, seed = \
        r.unpack("<IIIIIIQ")
    scales = []
    for _ in range(n_scales):
        grid, stride = r.unpack("<II")
        anchors = tuple(r.unpack("<ff") for _ in range(bpc))
        scales.append(Scale(grid_size=grid, stride=stride, anchors=anchors))
    cfg = ScaleConfig(scales=tuple(scales), boxes_per_cell=bpc, num_classes=num_classes)
    cfg.validate_input_side(input_side)

    trunk_shapes, head_shapes, _ = parameter_shapes(
        cfg, input_side, in_channels, base_channels
    )

    def read_tensor(shape):
        n = int(np.prod(shape))
        buf = r.take(4 * n)
        return np.frombuffer(buf, dtype="<f4").astype(np.float64).reshape(shape)

    trunk = tuple((read_tensor(ws), read_tensor(bs)) for ws, bs in trunk_shapes)
    heads = tuple((read_tensor(ws), read_tensor(bs)) for ws, bs in head_shapes)
    if r.pos != len(r.data):
        raise WeightsFormatError(f"{len(r.data) - r.pos} trailing bytes in weights file")
    return DetectorWeights(
        config=cfg,
        input_side=input_side,
        in_channels=in_channels,
        base_channels=base_channels,
        seed=seed,
        trunk=trunk,
        heads=heads,
    )
