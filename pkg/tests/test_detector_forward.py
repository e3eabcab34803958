import numpy as np
import pytest

from advoverlay.detector import (
    Detector,
    forward,
    full_scale_config,
    init_detector,
    make_scale_config,
    toy_scale_config,
)
from advoverlay.errors import ConfigurationError, ShapeError
from advoverlay.image import ImageTensor

from conftest import tiny_config


def test_full_config_head_shapes():
    w = init_detector(full_scale_config(), 416, seed=7)
    raw = forward(w, ImageTensor.full(416, 416, 0.5))
    assert [t.shape for t in raw.scales] == [(13, 13, 3, 85), (26, 26, 3, 85), (52, 52, 3, 85)]
    assert raw.candidate_count == 3 * (13**2 + 26**2 + 52**2) == 10647


def test_single_scale_shape_arithmetic():
    cfg = make_scale_config([(4, 8, [(10.0, 10.0)])], boxes_per_cell=1, num_classes=2)
    w = init_detector(cfg, 32, seed=0)
    raw = forward(w, ImageTensor.full(32, 32, 0.5))
    assert raw.scales[0].shape == (4, 4, 1, 7)


def test_init_deterministic_bitwise():
    a = init_detector(toy_scale_config(), 128, seed=11)
    b = init_detector(toy_scale_config(), 128, seed=11)
    for ta, tb in zip(a.parameter_arrays(), b.parameter_arrays()):
        assert np.array_equal(ta, tb)
    c = init_detector(toy_scale_config(), 128, seed=12)
    assert any(not np.array_equal(ta, tc)
               for ta, tc in zip(a.parameter_arrays(), c.parameter_arrays()))


def test_init_rejects_bad_divisibility():
    cfg = make_scale_config([(4, 8, [(10.0, 10.0)])], boxes_per_cell=1, num_classes=2)
    with pytest.raises(ConfigurationError):
        init_detector(cfg, 40, seed=0)  # 4 * 8 != 40


def test_forward_rejects_wrong_size():
    w = init_detector(tiny_config(), 16, seed=1)
    with pytest.raises(ShapeError):
        forward(w, ImageTensor.full(32, 32, 0.5))


def test_forward_pure():
    w = init_detector(tiny_config(), 16, seed=1)
    img = ImageTensor(np.random.default_rng(0).uniform(0, 1, (16, 16, 3)))
    r1 = forward(w, img)
    r2 = forward(w, img)
    for a, b in zip(r1.scales, r2.scales):
        assert np.array_equal(a, b)


def test_zero_image_constant_logits_per_scale():
    # All biases are zero-initialized, so a zero image keeps every activation
    # at zero and all grid cells agree within a scale.
    w = init_detector(toy_scale_config(), 128, seed=7)
    raw = forward(w, ImageTensor.full(128, 128, 0.0))
    for t in raw.scales:
        first = t[0, 0]
        assert np.array_equal(t, np.broadcast_to(first, t.shape))


def test_receptive_field_locality():
    # A stack of L stride-2 3x3 convs (pad 1) makes output cell i depend on
    # inputs [2^L i - (2^L - 1), 2^L i + (2^L - 1)] per axis.
    cfg = make_scale_config([(4, 8, [(10.0, 10.0)])], boxes_per_cell=1, num_classes=2)
    w = init_detector(cfg, 32, seed=5)
    rng = np.random.default_rng(2)
    base = rng.uniform(0.2, 0.8, (32, 32, 3))
    r0 = forward(w, ImageTensor(base)).scales[0]

    half = 8 - 1  # 2^3 - 1
    for px, py in [(0, 0), (15, 15), (31, 2)]:
        bumped = base.copy()
        bumped[py, px, 1] = min(1.0, bumped[py, px, 1] + 0.2)
        r1 = forward(w, ImageTensor(bumped)).scales[0]
        affected_cols = {i for i in range(4) if abs(px - 8 * i) <= half}
        affected_rows = {i for i in range(4) if abs(py - 8 * i) <= half}
        changed = np.nonzero(np.any(r1 != r0, axis=(2, 3)))
        for row, col in zip(*changed):
            assert row in affected_rows and col in affected_cols
        # the perturbation must land somewhere
        assert changed[0].size > 0


def test_detector_class_wraps_weights():
    det = Detector(init_detector(toy_scale_config(), 128, seed=7))
    assert det.input_side == 128
    assert det.num_classes == 3
    dets = det.detect(ImageTensor.full(128, 128, 0.0))
    assert dets == []
