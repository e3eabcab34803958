"""Finite-difference oracles for the manual backprop."""

import numpy as np

from advoverlay.attack.losses import MultiUntargetedLoss
from advoverlay.detector import init_detector, make_scale_config
from advoverlay.detector.network import ForwardPass, input_gradient
from advoverlay.image import ImageTensor

H = 1e-3


def sum_logits_loss(raw):
    return float(sum(t.sum() for t in raw.scales)), [np.ones_like(t) for t in raw.scales]


def central_difference(weights, x, loss, points):
    """Independent oracle: (f(x+h) - f(x-h)) / 2h at selected pixels."""

    def value(arr):
        fp = ForwardPass(weights, arr[None])
        if hasattr(loss, "value_and_grad"):
            return loss.value_and_grad(fp.raw)[0]
        return loss(fp.raw)[0]

    out = {}
    for (i, j, c) in points:
        xp = x.copy()
        xp[i, j, c] += H
        xm = x.copy()
        xm[i, j, c] -= H
        out[(i, j, c)] = (value(xp) - value(xm)) / (2 * H)
    return out


def assert_matches_fd(weights, x, loss, points, tol=1e-3):
    grad = input_gradient(weights, ImageTensor(x), loss)
    fd = central_difference(weights, x, loss, points)
    for (i, j, c), f in fd.items():
        a = grad[i, j, c]
        denom = max(abs(f), abs(a))
        assert abs(f - a) <= max(tol * denom, 1e-9), \
            f"grad mismatch at {(i, j, c)}: fd={f}, analytic={a}"


def test_constant_loss_zero_gradient():
    cfg = make_scale_config([(2, 8, [(6.0, 6.0)])], boxes_per_cell=1, num_classes=2)
    w = init_detector(cfg, 16, seed=1)
    img = ImageTensor(np.random.default_rng(0).uniform(0.2, 0.8, (16, 16, 3)))

    def const_loss(raw):
        return 1.0, [np.zeros_like(t) for t in raw.scales]

    g = input_gradient(w, img, const_loss)
    assert np.array_equal(g, np.zeros_like(g))


def test_sum_loss_matches_fd():
    rng = np.random.default_rng(1)
    cfg = make_scale_config([(2, 8, [(6.0, 6.0)])], boxes_per_cell=1, num_classes=2)
    w = init_detector(cfg, 16, seed=4)
    x = rng.uniform(0.1, 0.9, (16, 16, 3))
    pts = [tuple(rng.integers(0, d) for d in (16, 16, 3)) for _ in range(30)]
    assert_matches_fd(w, x, sum_logits_loss, pts)


def test_untargeted_loss_matches_fd_multiscale():
    rng = np.random.default_rng(2)
    cfg = make_scale_config(
        [(2, 8, [(6.0, 6.0), (9.0, 5.0)]), (4, 4, [(3.0, 3.0), (4.0, 6.0)])],
        boxes_per_cell=2, num_classes=3,
    )
    w = init_detector(cfg, 16, seed=6)
    x = rng.uniform(0.1, 0.9, (16, 16, 3))
    pts = [tuple(rng.integers(0, d) for d in (16, 16, 3)) for _ in range(30)]
    assert_matches_fd(w, x, MultiUntargetedLoss(), pts)


def test_parameter_gradients_match_fd():
    rng = np.random.default_rng(3)
    cfg = make_scale_config([(2, 8, [(6.0, 6.0)])], boxes_per_cell=1, num_classes=2)
    w = init_detector(cfg, 16, seed=8)
    x = rng.uniform(0.1, 0.9, (16, 16, 3))
    loss = MultiUntargetedLoss()

    fp = ForwardPass(w, x[None])
    _, grads = loss.value_and_grad(fp.raw)
    _, pgrads = fp.backward(grads, want_param_grads=True)

    params = [np.array(t) for t in w.parameter_arrays()]

    def rebuild(ps):
        from advoverlay.detector.network import DetectorWeights

        it = iter(ps)
        trunk = tuple((next(it), next(it)) for _ in w.trunk)
        heads = tuple((next(it), next(it)) for _ in w.heads)
        return DetectorWeights(config=w.config, input_side=w.input_side,
                               in_channels=w.in_channels, base_channels=w.base_channels,
                               seed=w.seed, trunk=trunk, heads=heads)

    h = 1e-5
    for pi in range(len(params)):
        flat = params[pi].reshape(-1)
        for idx in rng.choice(flat.size, size=min(4, flat.size), replace=False):
            plus = [p.copy() for p in params]
            plus[pi].reshape(-1)[idx] += h
            minus = [p.copy() for p in params]
            minus[pi].reshape(-1)[idx] -= h
            vp = loss.value_and_grad(ForwardPass(rebuild(plus), x[None]).raw)[0]
            vm = loss.value_and_grad(ForwardPass(rebuild(minus), x[None]).raw)[0]
            fd = (vp - vm) / (2 * h)
            an = pgrads[pi].reshape(-1)[idx]
            denom = max(abs(fd), abs(an))
            assert abs(fd - an) <= max(1e-3 * denom, 1e-8)
