"""The three adversarial objectives over raw detector logits.

All are maximized. With s = sigmoid, c the objectness logit and p the class
logits of candidate i:

  one-targeted      max_i s(c_i) * s(p_i_t)
  multi-targeted    sum_i s(c_i) * s(p_i_t)
  multi-untargeted  sum_i sum_j s(c_i) * s(p_i_j)
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit as sigmoid

from ..detector.network import RawPrediction
from ..errors import ConfigurationError


def _dsigmoid(s: np.ndarray) -> np.ndarray:
    return s * (1.0 - s)


def _target_index(raw: RawPrediction, target_class: int | None) -> int:
    if target_class is None:
        raise ConfigurationError("targeted loss requires target_class")
    k = raw.num_classes
    if not 1 <= target_class <= k:
        raise ConfigurationError(f"target_class must be in [1, {k}], got {target_class}")
    return 4 + target_class  # last-axis offset of p_t


class OneTargetedLoss:
    """Score of the single best candidate for the target class."""

    def __init__(self, target_class: int):
        self.target_class = target_class

    def value_and_grad(self, raw: RawPrediction):
        t = _target_index(raw, self.target_class)
        best_val = -1.0
        best = None  # (scale index, cell index tuple)
        for si, logits in enumerate(raw.scales):
            v = sigmoid(logits[..., 4]) * sigmoid(logits[..., t])
            # Flat argmax gives the lowest candidate index on ties.
            flat = int(v.argmax())
            val = float(v.flat[flat])
            if val > best_val:
                best_val = val
                best = (si, np.unravel_index(flat, v.shape))
        grads = raw.zeros_like_grads()
        si, cell = best
        logits = raw.scales[si]
        sc = float(sigmoid(logits[cell + (4,)]))
        sp = float(sigmoid(logits[cell + (t,)]))
        grads[si][cell + (4,)] = sc * (1.0 - sc) * sp
        grads[si][cell + (t,)] = sc * sp * (1.0 - sp)
        return best_val, grads

    def value(self, raw: RawPrediction) -> float:
        return self.value_and_grad(raw)[0]


class MultiTargetedLoss:
    """Sum of target-class scores over all candidates."""

    def __init__(self, target_class: int):
        self.target_class = target_class

    def value_and_grad(self, raw: RawPrediction):
        t = _target_index(raw, self.target_class)
        total = 0.0
        grads = []
        for logits in raw.scales:
            sc = sigmoid(logits[..., 4])
            sp = sigmoid(logits[..., t])
            total += float((sc * sp).sum())
            g = np.zeros_like(logits)
            g[..., 4] = _dsigmoid(sc) * sp
            g[..., t] = sc * _dsigmoid(sp)
            grads.append(g)
        return total, grads

    def value(self, raw: RawPrediction) -> float:
        return self.value_and_grad(raw)[0]


class MultiUntargetedLoss:
    """Sum of scores over all candidates and all classes."""

    def value_and_grad(self, raw: RawPrediction):
        total = 0.0
        grads = []
        for logits in raw.scales:
            sc = sigmoid(logits[..., 4])
            sp = sigmoid(logits[..., 5:])
            total += float((sc[..., None] * sp).sum())
            g = np.zeros_like(logits)
            g[..., 4] = _dsigmoid(sc) * sp.sum(axis=-1)
            g[..., 5:] = sc[..., None] * _dsigmoid(sp)
            grads.append(g)
        return total, grads

    def value(self, raw: RawPrediction) -> float:
        return self.value_and_grad(raw)[0]


def make_loss(mode: str, target_class: int | None = None):
    if mode == "one-targeted":
        if target_class is None:
            raise ConfigurationError("one-targeted mode requires target_class")
        return OneTargetedLoss(target_class)
    if mode == "multi-targeted":
        if target_class is None:
            raise ConfigurationError("multi-targeted mode requires target_class")
        return MultiTargetedLoss(target_class)
    if mode == "multi-untargeted":
        return MultiUntargetedLoss()
    raise ConfigurationError(f"unknown attack mode {mode!r}")


def adversarial_loss(raw: RawPrediction, mode: str, target_class: int | None = None) -> float:
    """Scalar loss value for the given mode (to be maximized)."""
    return make_loss(mode, target_class).value(raw)
