from .config import (
    APPLICATIONS,
    CHANNEL_SOURCES,
    DEFAULT_ALPHA,
    DEFAULT_BOX_SIZE,
    DEFAULT_ITERATIONS,
    DEFAULT_XI,
    MODES,
    AttackConfig,
)
from .loop import AttackReport, AttackState, attack_step, run_attack
from .losses import (
    MultiTargetedLoss,
    MultiUntargetedLoss,
    OneTargetedLoss,
    adversarial_loss,
    make_loss,
)
from .mask import Mask, Rect, build_mask, mask_from_png, mask_to_png, rects_from_json, rects_to_json
from .overlay import apply_perturbation

__all__ = [
    "APPLICATIONS",
    "CHANNEL_SOURCES",
    "DEFAULT_ALPHA",
    "DEFAULT_BOX_SIZE",
    "DEFAULT_ITERATIONS",
    "DEFAULT_XI",
    "MODES",
    "AttackConfig",
    "AttackReport",
    "AttackState",
    "attack_step",
    "run_attack",
    "MultiTargetedLoss",
    "MultiUntargetedLoss",
    "OneTargetedLoss",
    "adversarial_loss",
    "make_loss",
    "Mask",
    "Rect",
    "build_mask",
    "mask_from_png",
    "mask_to_png",
    "rects_from_json",
    "rects_to_json",
    "apply_perturbation",
]
