"""advoverlay: mask-localized adversarial overlay attacks on a YOLO-style
detector, with offline evaluation tooling and a real-time streaming server."""

from .attack import (
    AttackConfig,
    AttackReport,
    AttackState,
    Mask,
    Rect,
    adversarial_loss,
    apply_perturbation,
    attack_step,
    build_mask,
    run_attack,
)
from .detector import (
    Detection,
    Detector,
    DetectorWeights,
    RawPrediction,
    ScaleConfig,
    decode,
    forward,
    full_scale_config,
    init_detector,
    input_gradient,
    load_weights,
    nms,
    save_weights,
    toy_scale_config,
)
from .evaluation import MaskSpec, SweepConfig, TrialResult, mean_box_increase, run_corpus, run_sweep, success_rate
from .image import ImageTensor, letterbox, load_image, save_png

__version__ = "0.1.0"

__all__ = [
    "AttackConfig",
    "AttackReport",
    "AttackState",
    "Mask",
    "Rect",
    "adversarial_loss",
    "apply_perturbation",
    "attack_step",
    "build_mask",
    "run_attack",
    "Detection",
    "Detector",
    "DetectorWeights",
    "RawPrediction",
    "ScaleConfig",
    "decode",
    "forward",
    "full_scale_config",
    "init_detector",
    "input_gradient",
    "load_weights",
    "nms",
    "save_weights",
    "toy_scale_config",
    "MaskSpec",
    "SweepConfig",
    "TrialResult",
    "mean_box_increase",
    "run_corpus",
    "run_sweep",
    "success_rate",
    "ImageTensor",
    "letterbox",
    "load_image",
    "save_png",
    "__version__",
]
