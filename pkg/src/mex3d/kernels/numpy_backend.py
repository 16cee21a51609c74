"""Vectorized numpy implementations of the hot layer kernels.

These are the fallback used when the compiled extension is unavailable.
Shape validation lives in :mod:`mex3d.kernels`; functions here assume
well-formed inputs: x is (C, H, W, D), weights are (F, C, KH, KW, KD),
all arrays C-contiguous and of a common float dtype.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

name = "numpy"


def conv3d_forward(x, w, b):
    kh, kw, kd = w.shape[2:]
    windows = sliding_window_view(x, (kh, kw, kd), axis=(1, 2, 3))
    # windows: (C, OH, OW, OD, KH, KW, KD); contract channel + kernel axes
    out = np.tensordot(w, windows, axes=([1, 2, 3, 4], [0, 4, 5, 6]))
    out += b[:, None, None, None]
    return np.ascontiguousarray(out)


def conv3d_backward(x, w, gy):
    kh, kw, kd = w.shape[2:]
    oh, ow, od = gy.shape[1:]
    gb = gy.sum(axis=(1, 2, 3))
    windows = sliding_window_view(x, (kh, kw, kd), axis=(1, 2, 3))
    gw = np.tensordot(gy, windows, axes=([1, 2, 3], [1, 2, 3]))
    gx = np.zeros_like(x)
    # Scatter each kernel offset's contribution back onto the input window.
    for i in range(kh):
        for j in range(kw):
            for k in range(kd):
                gx[:, i : i + oh, j : j + ow, k : k + od] += np.tensordot(
                    w[:, :, i, j, k], gy, axes=([0], [0])
                )
    return gx, np.ascontiguousarray(gw), gb


def maxpool3d_forward(x, window):
    ph, pw, pd = window
    c, h, w, d = x.shape
    oh, ow, od = h // ph, w // pw, d // pd
    cropped = x[:, : oh * ph, : ow * pw, : od * pd]
    tiles = (
        cropped.reshape(c, oh, ph, ow, pw, od, pd)
        .transpose(0, 1, 3, 5, 2, 4, 6)
        .reshape(c, oh, ow, od, ph * pw * pd)
    )
    # argmax returns the first maximum, i.e. ties break to the first element
    # of the window in row-major (h, w, d) scan order.
    local = tiles.argmax(axis=-1)
    out = tiles.max(axis=-1)
    i, j, k = np.unravel_index(local, (ph, pw, pd))
    ci = np.arange(c)[:, None, None, None]
    y = np.arange(oh)[None, :, None, None] * ph + i
    xx = np.arange(ow)[None, None, :, None] * pw + j
    t = np.arange(od)[None, None, None, :] * pd + k
    argmax = ((ci * h + y) * w + xx) * d + t
    return np.ascontiguousarray(out), argmax.astype(np.int64)


def maxpool3d_backward(argmax, gy, in_shape):
    gx = np.zeros(int(np.prod(in_shape)), dtype=gy.dtype)
    np.add.at(gx, argmax.ravel(), gy.ravel())
    return gx.reshape(in_shape)
