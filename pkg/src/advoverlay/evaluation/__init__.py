from .corpus import IMAGE_SUFFIXES, MaskSpec, list_corpus_images, run_corpus
from .csvio import (
    write_detections_csv,
    write_manifest,
    write_metrics_csv,
    write_report_csv,
    write_sweep_csv,
    write_trials_csv,
)
from .metrics import TrialResult, mean_box_increase, success_rate
from .sweep import SWEEP_PARAMETERS, SweepConfig, aspect_rect, configs_for_value, run_sweep

__all__ = [
    "IMAGE_SUFFIXES",
    "MaskSpec",
    "list_corpus_images",
    "run_corpus",
    "write_detections_csv",
    "write_manifest",
    "write_metrics_csv",
    "write_report_csv",
    "write_sweep_csv",
    "write_trials_csv",
    "TrialResult",
    "mean_box_increase",
    "success_rate",
    "SWEEP_PARAMETERS",
    "SweepConfig",
    "aspect_rect",
    "configs_for_value",
    "run_sweep",
]
