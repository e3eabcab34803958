"""Success rate and mean box number increase over trial collections."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TrialResult:
    """Per-image attack outcome over a fixed iteration budget."""

    image_id: str
    benign_boxes: int
    per_iteration_boxes: tuple[int, ...]

    @property
    def first_success_iteration(self) -> int | None:
        """Smallest 1-based iteration whose box count exceeds the benign count."""
        for i, count in enumerate(self.per_iteration_boxes):
            if count > self.benign_boxes:
                return i + 1
        return None


def _check_trials(trials, at_iteration: int) -> None:
    if not trials:
        raise ValueError("metric undefined for an empty trial list")
    if at_iteration < 1:
        raise ValueError(f"at_iteration must be >= 1, got {at_iteration}")
    budget = min(len(t.per_iteration_boxes) for t in trials)
    if at_iteration > budget:
        raise ValueError(f"at_iteration {at_iteration} exceeds iteration budget {budget}")


def success_rate(trials: list[TrialResult], at_iteration: int) -> float:
    """Fraction of trials that fabricated at least one box by the given iteration."""
    _check_trials(trials, at_iteration)
    hits = sum(
        1 for t in trials
        if t.first_success_iteration is not None
        and t.first_success_iteration <= at_iteration
    )
    return hits / len(trials)


def mean_box_increase(trials: list[TrialResult], at_iteration: int) -> float:
    """Mean gain in post-NMS box count over the benign output at the given iteration."""
    _check_trials(trials, at_iteration)
    total = sum(t.per_iteration_boxes[at_iteration - 1] - t.benign_boxes for t in trials)
    return total / len(trials)
