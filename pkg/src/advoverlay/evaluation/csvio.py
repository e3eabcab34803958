"""Deterministic CSV and manifest writers (UTF-8, LF, header row)."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from ..attack.loop import AttackReport
from .metrics import TrialResult, mean_box_increase, success_rate


def _write(path: str | Path, render) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    render(writer)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_report_csv(report: AttackReport, path: str | Path) -> None:
    def render(w):
        w.writerow(["iteration", "loss", "benign_boxes", "adversarial_boxes"])
        for i, (loss, count) in enumerate(report.per_iteration, start=1):
            w.writerow([i, repr(loss), report.benign_box_count, count])

    _write(path, render)


def write_detections_csv(detections, path: str | Path) -> None:
    def render(w):
        w.writerow(["class_id", "score", "b_x", "b_y", "b_w", "b_h"])
        for d in detections:
            w.writerow([d.class_id, repr(d.score), repr(d.b_x), repr(d.b_y),
                        repr(d.b_w), repr(d.b_h)])

    _write(path, render)


def write_trials_csv(trials: list[TrialResult], path: str | Path) -> None:
    def render(w):
        w.writerow(["image_id", "benign_boxes", "iteration", "adversarial_boxes"])
        for t in trials:
            for i, count in enumerate(t.per_iteration_boxes, start=1):
                w.writerow([t.image_id, t.benign_boxes, i, count])

    _write(path, render)


def write_metrics_csv(trials: list[TrialResult], budget: int, path: str | Path) -> None:
    def render(w):
        w.writerow(["iteration", "success_rate", "mean_box_increase"])
        for i in range(1, budget + 1):
            w.writerow([i, repr(success_rate(trials, i)), repr(mean_box_increase(trials, i))])

    _write(path, render)


def write_sweep_csv(rows, path: str | Path) -> None:
    def render(w):
        w.writerow(["parameter_value", "iteration", "success_rate", "mean_box_increase"])
        for value, it, sr, mbi in rows:
            w.writerow([value, it, repr(sr), repr(mbi)])

    _write(path, render)


def write_manifest(path: str | Path, entries: dict) -> None:
    """Key/value run record; deterministic order, no timestamps."""
    lines = [f"{k} = {entries[k]}" for k in sorted(entries)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
