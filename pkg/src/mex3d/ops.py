"""Cheap layer operations: dense, relu, dropout, flatten, concat, softmax.

Forward/backward pairs are free functions over numpy arrays. Unlike the
conv/pool kernels these never dominate runtime, so they have no compiled
counterpart; dense layers ride on numpy's BLAS matmul.
"""

from __future__ import annotations

import numpy as np

from .shapes import ShapeError


def dense_forward(x, w, b):
    """y[j] = sum_i x[i] * w[i, j] + b[j] for a 1-D x of length n."""
    x = np.asarray(x)
    w = np.asarray(w)
    if x.ndim != 1 or w.ndim != 2 or x.shape[0] != w.shape[0]:
        raise ShapeError(f"dense input length {x.shape} incompatible with weights {w.shape}")
    if b.shape != (w.shape[1],):
        raise ShapeError(f"dense bias shape {b.shape} != ({w.shape[1]},)")
    return x @ w + b


def dense_backward(x, w, gy):
    if gy.shape != (w.shape[1],):
        raise ShapeError(f"dense output gradient shape {gy.shape} != ({w.shape[1]},)")
    gx = w @ gy
    gw = np.outer(x, gy)
    gb = gy.copy()
    return gx, gw, gb


def relu_forward(x):
    return np.maximum(x, 0)


def relu_backward(x, gy):
    # Subgradient at exactly 0 is 0.
    return gy * (x > 0)


def dropout_forward(x, rate, mode, rng):
    """Inverted dropout: train-time survivors are scaled by 1/(1-rate).

    Returns (output, mask); mask is None when the op is the identity
    (infer mode or rate 0 without randomness consumed).
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if mode == "infer" or rate == 0.0:
        return x, None
    if rng is None:
        raise ValueError("train-mode dropout requires an rng")
    # Draw in float64 regardless of tensor precision so a seed selects the
    # same mask in 32- and 64-bit runs.
    keep = rng.random(x.shape) >= rate
    scale = np.asarray(1.0 / (1.0 - rate), dtype=x.dtype)
    return x * keep * scale, keep


def dropout_backward(gy, rate, mask):
    if mask is None:
        return gy
    scale = np.asarray(1.0 / (1.0 - rate), dtype=gy.dtype)
    return gy * mask * scale


def flatten(x):
    """Row-major (channels, height, width, depth) linearization."""
    return np.ascontiguousarray(x).reshape(-1)


def flatten_backward(gy, shape):
    return gy.reshape(shape)


def concat(a, b):
    return np.concatenate([a, b])


def concat_backward(gy, len_a):
    return gy[:len_a], gy[len_a:]


def softmax(logits):
    """Numerically stable softmax via max-subtraction."""
    logits = np.asarray(logits)
    e = np.exp(logits - logits.max())
    return e / e.sum()


def softmax_xent(logits, true_class):
    """Class probabilities and cross-entropy loss -ln(p[true_class])."""
    logits = np.asarray(logits)
    k = logits.shape[0]
    if not 0 <= true_class < k:
        raise ValueError(f"class index {true_class} out of range for {k} classes")
    m = logits.max()
    e = np.exp(logits - m)
    z = e.sum()
    probs = e / z
    loss = float(np.log(z) - (logits[true_class] - m))
    return probs, loss


def softmax_xent_grad(probs, true_class):
    """Gradient of the cross-entropy loss w.r.t. the logits."""
    k = probs.shape[0]
    if not 0 <= true_class < k:
        raise ValueError(f"class index {true_class} out of range for {k} classes")
    grad = probs.copy()
    grad[true_class] -= 1.0
    return grad
