"""Attack hyperparameters and their validation."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import ConfigurationError

MODES = ("one-targeted", "multi-targeted", "multi-untargeted")
CHANNEL_SOURCES = ("red", "green", "blue", "average")
APPLICATIONS = ("filter", "patch", "overlay")

# Defaults: xi=8, alpha=2 (8-bit pixel units), multi-untargeted, monochrome
# built from the RGB-average gradient.
DEFAULT_XI = 8.0
DEFAULT_ALPHA = 2.0
DEFAULT_ITERATIONS = 100
DEFAULT_BOX_SIZE = 64


@dataclass(frozen=True)
class AttackConfig:
    """Attack mode and strength.

    xi and alpha are in 8-bit pixel units (divided by 255 internally), so
    xi=8 bounds the perturbation at 8/255 on [0, 1] images. target_class is
    1-based. monochrome_signed switches the monochrome update from the
    verbatim unsigned averaged gradient to a sign() update like the
    polychrome branch.
    """

    mode: str = "multi-untargeted"
    target_class: int | None = None
    xi: float = DEFAULT_XI
    alpha: float = DEFAULT_ALPHA
    iterations: int = DEFAULT_ITERATIONS
    monochrome: bool = False
    channel_source: str = "average"
    application: str = "overlay"
    monochrome_signed: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.channel_source not in CHANNEL_SOURCES:
            raise ConfigurationError(
                f"channel_source must be one of {CHANNEL_SOURCES}, got {self.channel_source!r}"
            )
        if self.application not in APPLICATIONS:
            raise ConfigurationError(
                f"application must be one of {APPLICATIONS}, got {self.application!r}"
            )
        if self.xi <= 0:
            raise ConfigurationError(f"xi must be > 0, got {self.xi}")
        if self.alpha <= 0:
            raise ConfigurationError(f"alpha must be > 0, got {self.alpha}")
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.mode in ("one-targeted", "multi-targeted"):
            if self.target_class is None:
                raise ConfigurationError(f"{self.mode} mode requires target_class")
            if self.target_class < 1:
                raise ConfigurationError(
                    f"target_class must be >= 1, got {self.target_class}"
                )

    @property
    def xi_unit(self) -> float:
        return self.xi / 255.0

    @property
    def alpha_unit(self) -> float:
        return self.alpha / 255.0

    def with_updates(self, **kwargs) -> "AttackConfig":
        return replace(self, **kwargs)

    def check_target_for(self, num_classes: int) -> None:
        if self.target_class is not None and self.target_class > num_classes:
            raise ConfigurationError(
                f"target_class {self.target_class} exceeds detector's {num_classes} classes"
            )
