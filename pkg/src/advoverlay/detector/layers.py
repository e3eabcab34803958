"""Convolution, activation and resampling primitives with manual backprop.

All tensors are batched NHWC float64. Each forward function returns what the
matching backward function needs; no global state.
"""

from __future__ import annotations

import numpy as np

LEAKY_SLOPE = 0.1


def im2col(x: np.ndarray, k: int, stride: int, pad: int) -> tuple[np.ndarray, tuple[int, int]]:
    """Unfold k x k patches into rows of shape (N*Ho*Wo, k*k*C)."""
    n, h, w, c = x.shape
    ho = (h + 2 * pad - k) // stride + 1
    wo = (w + 2 * pad - k) // stride + 1
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0))) if pad else x
    sn, sh, sw, sc = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp,
        shape=(n, ho, wo, k, k, c),
        strides=(sn, sh * stride, sw * stride, sh, sw, sc),
        writeable=False,
    )
    return view.reshape(n * ho * wo, k * k * c), (ho, wo)


def conv2d_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray,
                   stride: int, pad: int):
    """weight: (Cout, Cin, k, k). Returns (out, cache)."""
    cout, cin, k, _ = weight.shape
    cols, (ho, wo) = im2col(x, k, stride, pad)
    wmat = weight.transpose(2, 3, 1, 0).reshape(k * k * cin, cout)
    out = cols @ wmat + bias
    n = x.shape[0]
    out = out.reshape(n, ho, wo, cout)
    cache = (x.shape, cols, wmat, k, stride, pad)
    return out, cache


def conv2d_backward(dout: np.ndarray, cache, weight: np.ndarray,
                    want_param_grads: bool = False):
    """Returns (dx, dweight, dbias); param grads are None unless requested."""
    x_shape, cols, wmat, k, stride, pad = cache
    n, h, w, cin = x_shape
    _, ho, wo, cout = dout.shape
    dmat = dout.reshape(n * ho * wo, cout)

    dweight = dbias = None
    if want_param_grads:
        dw_flat = cols.T @ dmat  # (k*k*Cin, Cout)
        dweight = dw_flat.reshape(k, k, cin, cout).transpose(3, 2, 0, 1)
        dbias = dmat.sum(axis=0)

    dcols = dmat @ wmat.T
    dcols = dcols.reshape(n, ho, wo, k, k, cin)
    hp, wp = h + 2 * pad, w + 2 * pad
    dxp = np.zeros((n, hp, wp, cin), dtype=dout.dtype)
    for i in range(k):
        for j in range(k):
            dxp[:, i : i + stride * ho : stride, j : j + stride * wo : stride, :] += \
                dcols[:, :, :, i, j, :]
    dx = dxp[:, pad : pad + h, pad : pad + w, :] if pad else dxp
    return dx, dweight, dbias


def leaky_relu_forward(x: np.ndarray):
    out = np.where(x > 0, x, LEAKY_SLOPE * x)
    return out, x


def leaky_relu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dout * np.where(x > 0, 1.0, LEAKY_SLOPE)


def upsample2x_forward(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=1).repeat(2, axis=2)


def upsample2x_backward(dout: np.ndarray) -> np.ndarray:
    n, h2, w2, c = dout.shape
    return dout.reshape(n, h2 // 2, 2, w2 // 2, 2, c).sum(axis=(2, 4))
