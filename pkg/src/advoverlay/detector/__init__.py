from .config import (
    FULL_INPUT_SIDE,
    TOY_INPUT_SIDE,
    Scale,
    ScaleConfig,
    full_scale_config,
    make_scale_config,
    toy_scale_config,
)
from .decode import (
    DEFAULT_CONF_THRESHOLD,
    DEFAULT_IOU_THRESHOLD,
    Detection,
    decode,
    iou,
    nms,
)
from .network import (
    Detector,
    DetectorProtocol,
    DetectorWeights,
    ForwardPass,
    RawPrediction,
    forward,
    init_detector,
    input_gradient,
    parameter_shapes,
)
from .weights_io import WeightsFormatError, load_weights, save_weights

__all__ = [
    "FULL_INPUT_SIDE",
    "TOY_INPUT_SIDE",
    "Scale",
    "ScaleConfig",
    "full_scale_config",
    "make_scale_config",
    "toy_scale_config",
    "DEFAULT_CONF_THRESHOLD",
    "DEFAULT_IOU_THRESHOLD",
    "Detection",
    "decode",
    "iou",
    "nms",
    "Detector",
    "DetectorProtocol",
    "DetectorWeights",
    "ForwardPass",
    "RawPrediction",
    "forward",
    "init_detector",
    "input_gradient",
    "parameter_shapes",
    "WeightsFormatError",
    "load_weights",
    "save_weights",
]
