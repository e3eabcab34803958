#!/usr/bin/env python3
"""Train the toy shape detector used by the test fixtures.

Lightly trains the reference architecture on synthetic shape scenes with a
standard YOLO-style assignment (best anchor by wh-IoU, center cell) and
saves the weights in ADVD format. Fully seeded; rerunning reproduces the
same weights file byte for byte.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from advoverlay.detector.config import TOY_INPUT_SIDE, toy_scale_config
from advoverlay.detector.network import Detector, DetectorWeights, ForwardPass, init_detector
from advoverlay.detector.weights_io import save_weights
from advoverlay.rng import derive_seed
from advoverlay.synth import make_scene

LR = 1e-3
BATCH = 8
POS_OBJ_WEIGHT = 8.0
CLS_WEIGHT = 2.0
BOX_WEIGHT = 1.0
# Label smoothing keeps background logits near logit(0.02) instead of
# drifting arbitrarily negative, which would flatten sigmoid gradients.
SMOOTH = 0.02


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60, 60)))


def assign_targets(objects, config, side):
    """One positive (scale, row, col, anchor) per object, chosen by wh-IoU."""
    targets = []
    for si, sc in enumerate(config.scales):
        s = sc.grid_size
        b = config.boxes_per_cell
        k = config.num_classes
        targets.append({
            "obj": np.zeros((s, s, b)),
            "pos": np.zeros((s, s, b), dtype=bool),
            "cls": np.zeros((s, s, b, k)),
            "box": np.zeros((s, s, b, 4)),
        })
    for o in objects:
        best = None
        best_iou = -1.0
        for si, sc in enumerate(config.scales):
            for ai, (aw, ah) in enumerate(sc.anchors):
                inter = min(o.w, aw) * min(o.h, ah)
                union = o.w * o.h + aw * ah - inter
                iou = inter / union
                if iou > best_iou:
                    best_iou = iou
                    best = (si, ai)
        si, ai = best
        sc = config.scales[si]
        col = min(int(o.cx // sc.stride), sc.grid_size - 1)
        row = min(int(o.cy // sc.stride), sc.grid_size - 1)
        t = targets[si]
        t["obj"][row, col, ai] = 1.0
        t["pos"][row, col, ai] = True
        t["cls"][row, col, ai, o.class_id - 1] = 1.0
        aw, ah = sc.anchors[ai]
        t["box"][row, col, ai] = [
            o.cx / sc.stride - col,
            o.cy / sc.stride - row,
            math.log(o.w / aw),
            math.log(o.h / ah),
        ]
    return targets


def loss_and_grads(raw, targets):
    """BCE objectness/class + squared-error box regression, gradients wrt logits."""
    total = 0.0
    grads = []
    for logits, t in zip(raw.scales, targets):
        g = np.zeros_like(logits)
        obj_logit = logits[..., 4]
        p_obj = sigmoid(obj_logit)
        obj_t = t["obj"] * (1 - 2 * SMOOTH) + SMOOTH
        w = np.where(t["pos"], POS_OBJ_WEIGHT, 1.0)
        # BCE with logits; stable form.
        bce = np.maximum(obj_logit, 0) - obj_logit * obj_t + np.log1p(np.exp(-np.abs(obj_logit)))
        total += float((w * bce).sum())
        g[..., 4] = w * (p_obj - obj_t)

        pos = t["pos"]
        if pos.any():
            cls_logit = logits[..., 5:][pos]
            cls_t = t["cls"][pos] * (1 - 2 * SMOOTH) + SMOOTH
            p_cls = sigmoid(cls_logit)
            bce_c = np.maximum(cls_logit, 0) - cls_logit * cls_t + np.log1p(np.exp(-np.abs(cls_logit)))
            total += CLS_WEIGHT * float(bce_c.sum())
            gc = np.zeros_like(logits[..., 5:])
            gc[pos] = CLS_WEIGHT * (p_cls - cls_t)
            g[..., 5:] = gc

            xy_logit = logits[..., 0:2][pos]
            xy_t = t["box"][pos][:, 0:2]
            s_xy = sigmoid(xy_logit)
            total += BOX_WEIGHT * float(((s_xy - xy_t) ** 2).sum())
            gxy = np.zeros_like(logits[..., 0:2])
            gxy[pos] = BOX_WEIGHT * 2.0 * (s_xy - xy_t) * s_xy * (1 - s_xy)
            g[..., 0:2] = gxy

            wh_logit = logits[..., 2:4][pos]
            wh_t = t["box"][pos][:, 2:4]
            total += BOX_WEIGHT * float(((wh_logit - wh_t) ** 2).sum())
            gwh = np.zeros_like(logits[..., 2:4])
            gwh[pos] = BOX_WEIGHT * 2.0 * (wh_logit - wh_t)
            g[..., 2:4] = gwh
        grads.append(g)
    return total, grads


class Adam:
    def __init__(self, params, lr):
        self.lr = lr
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1, b2, eps = 0.9, 0.999, 1e-8
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
            mhat = self.m[i] / (1 - b1**self.t)
            vhat = self.v[i] / (1 - b2**self.t)
            p -= self.lr * mhat / (np.sqrt(vhat) + eps)


def mutable_params(weights: DetectorWeights):
    return [np.array(t) for t in weights.parameter_arrays()]


def rebuild_weights(template: DetectorWeights, params) -> DetectorWeights:
    it = iter(params)
    trunk = tuple((next(it), next(it)) for _ in template.trunk)
    heads = tuple((next(it), next(it)) for _ in template.heads)
    return DetectorWeights(
        config=template.config,
        input_side=template.input_side,
        in_channels=template.in_channels,
        base_channels=template.base_channels,
        seed=template.seed,
        trunk=trunk,
        heads=heads,
    )


def evaluate(detector: Detector, seed: int, count: int = 20):
    """Fraction of objects found (right class, center within 12 px) and
    false positives per image."""
    found = total = fp = 0
    for i in range(count):
        image, objects = make_scene(derive_seed(seed, 10_000 + i), side=TOY_INPUT_SIDE)
        dets = detector.detect(image)
        total += len(objects)
        used = set()
        for o in objects:
            hit = None
            for j, d in enumerate(dets):
                if j in used or d.class_id != o.class_id:
                    continue
                if abs(d.b_x - o.cx) <= 12 and abs(d.b_y - o.cy) <= 12:
                    hit = j
                    break
            if hit is not None:
                used.add(hit)
                found += 1
        fp += len(dets) - len(used)
    return found / max(total, 1), fp / count


def train(steps: int = 3000, seed: int = 7, data_seed: int = 1234,
          log_every: int = 500, out: str | Path | None = None,
          base_channels: int = 8) -> DetectorWeights:
    config = toy_scale_config()
    template = init_detector(config, TOY_INPUT_SIDE, seed=seed,
                             base_channels=base_channels)
    params = mutable_params(template)
    opt = Adam(params, LR)

    for step in range(steps):
        grad_accum = [np.zeros_like(p) for p in params]
        loss_sum = 0.0
        weights = rebuild_weights(template, [p.copy() for p in params])
        for i in range(BATCH):
            scene_seed = derive_seed(data_seed, step * BATCH + i)
            image, objects = make_scene(scene_seed, side=TOY_INPUT_SIDE)
            fp = ForwardPass(weights, image.data[None])
            targets = assign_targets(objects, config, TOY_INPUT_SIDE)
            loss, grads = loss_and_grads(fp.raw, targets)
            _, pgrads = fp.backward(grads, want_param_grads=True)
            for acc, g in zip(grad_accum, pgrads):
                acc += g
            loss_sum += loss
        opt.step(params, [g / BATCH for g in grad_accum])
        if log_every and (step + 1) % log_every == 0:
            det = Detector(rebuild_weights(template, [p.copy() for p in params]))
            recall, fp_rate = evaluate(det, data_seed)
            print(f"step {step + 1}: loss {loss_sum / BATCH:.3f} "
                  f"recall {recall:.2f} fp/img {fp_rate:.2f}")

    trained = rebuild_weights(template, params)
    if out is not None:
        save_weights(trained, out)
        print(f"saved {out}")
    return trained


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--data-seed", type=int, default=1234)
    ap.add_argument("--base-channels", type=int, default=8)
    ap.add_argument("--out", default="tests/fixtures/toy_trained.advd")
    args = ap.parse_args()
    train(steps=args.steps, seed=args.seed, data_seed=args.data_seed, out=args.out,
          base_channels=args.base_channels)


if __name__ == "__main__":
    main()
