#!/usr/bin/env python3
"""Build the committed test fixtures: synthetic corpus, trained toy
detector, and the frozen calibration record.

Everything is seeded; rerunning reproduces identical bytes. The calibration
run measures the attack success rate of the exact configuration the
acceptance suite replays (centered 96x96 mask, xi=8, alpha=2, budget 100)
plus the box-size and attack-strength orderings, and freezes the numbers in
calibration.json.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))

from advoverlay.attack import AttackConfig, Rect, build_mask, run_attack
from advoverlay.detector.network import Detector
from advoverlay.evaluation.corpus import list_corpus_images
from advoverlay.image import letterbox, load_image
from advoverlay.synth import write_corpus
from train_toy_detector import train

CORPUS_SEED = 2026
CORPUS_SIZE = 50
TRAIN_STEPS = 3000
TRAIN_SEED = 7
DATA_SEED = 1234
BASE_CHANNELS = 8

MAIN_MASK = 96
BUDGET = 100
SUCCESS_THRESHOLD = 0.70


def corpus_success_rate(detector, corpus_dir, mask_size, xi):
    side = detector.input_side
    m = min(mask_size, side)
    mask = build_mask([Rect((side - m) // 2, (side - m) // 2, m, m)], side, side)
    config = AttackConfig(mode="multi-untargeted", xi=xi, alpha=2.0, iterations=BUDGET)
    successes = 0
    for path in list_corpus_images(corpus_dir):
        image = letterbox(load_image(path), side)
        _, report = run_attack(image, mask, config, detector, stop_on_success=True)
        successes += report.success
    return successes / CORPUS_SIZE


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fixtures", default=Path(__file__).resolve().parents[1] / "tests/fixtures")
    args = ap.parse_args()
    fixtures = Path(args.fixtures)
    fixtures.mkdir(parents=True, exist_ok=True)

    corpus_dir = fixtures / "corpus"
    print(f"writing {CORPUS_SIZE} corpus images to {corpus_dir}")
    write_corpus(corpus_dir, CORPUS_SIZE, CORPUS_SEED, side=128)

    weights_path = fixtures / "toy_trained.advd"
    print(f"training toy detector ({TRAIN_STEPS} steps) -> {weights_path}")
    weights = train(steps=TRAIN_STEPS, seed=TRAIN_SEED, data_seed=DATA_SEED,
                    base_channels=BASE_CHANNELS, out=weights_path)
    detector = Detector(weights)

    print("calibrating")
    main_rate = corpus_success_rate(detector, corpus_dir, MAIN_MASK, 8.0)
    box_rates = {size: corpus_success_rate(detector, corpus_dir, size, 8.0)
                 for size in (32, 64, 128)}
    xi_rates = {xi: corpus_success_rate(detector, corpus_dir, 64, float(xi))
                for xi in (2, 8)}

    calibration = {
        "corpus_seed": CORPUS_SEED,
        "corpus_size": CORPUS_SIZE,
        "train_steps": TRAIN_STEPS,
        "train_seed": TRAIN_SEED,
        "data_seed": DATA_SEED,
        "base_channels": BASE_CHANNELS,
        "budget": BUDGET,
        "main_mask": MAIN_MASK,
        "main_success_rate": main_rate,
        "success_threshold": SUCCESS_THRESHOLD,
        "box_size_success_rates": box_rates,
        "xi_success_rates": xi_rates,
    }
    out = fixtures / "calibration.json"
    out.write_text(json.dumps(calibration, indent=2, sort_keys=True) + "\n")
    print(json.dumps(calibration, indent=2, sort_keys=True))
    if main_rate < SUCCESS_THRESHOLD:
        print("WARNING: calibrated success rate below the frozen threshold",
              file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
