"""Hot layer kernels with a compiled core and a numpy fallback.

The compiled extension (``mex3d.kernels._native``, built from Cython) is
selected at import when present; otherwise the numpy implementations are
used. Force a choice with the ``MEX3D_KERNELS`` environment variable
(``cython`` or ``numpy``) or :func:`use_backend`.

All kernels take/return C-contiguous arrays in the canonical
(channels, height, width, depth) layout and never modify their inputs.
"""

from __future__ import annotations

import os

import numpy as np

from ..shapes import Shape4, ShapeError, conv3d_output_shape, pool3d_output_shape
from . import numpy_backend

_BACKENDS = {"numpy": numpy_backend}
try:
    from . import _native

    _BACKENDS["cython"] = _native
except ImportError:  # extension not built; numpy fallback stays active
    _native = None

_active = _BACKENDS.get(os.environ.get("MEX3D_KERNELS", "cython"), None)
if _active is None:
    requested = os.environ.get("MEX3D_KERNELS")
    if requested and requested not in ("cython", "numpy"):
        raise ImportError(f"unknown MEX3D_KERNELS backend {requested!r}")
    _active = _BACKENDS.get("cython", numpy_backend)


def backend_name() -> str:
    return _active.name


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def use_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}")
    _active = _BACKENDS[name]


_FLOAT_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))


def _as_float4d(x, what):
    x = np.asarray(x)
    if x.ndim != 4:
        raise ShapeError(f"{what} must be 4-D (channels, height, width, depth), got ndim {x.ndim}")
    return np.ascontiguousarray(x)


def _check_dtypes(*arrays):
    dtypes = {a.dtype for a in arrays}
    if len(dtypes) != 1 or next(iter(dtypes)) not in _FLOAT_DTYPES:
        raise TypeError(
            f"kernel arrays must share one float32/float64 dtype, got {sorted(str(d) for d in dtypes)}"
        )


def conv3d_forward(x, w, b):
    """Valid-mode stride-1 3D convolution.

    x: (C, H, W, D); w: (F, C, KH, KW, KD); b: (F,). Output is
    (F, H-KH+1, W-KW+1, D-KD+1); each element is the dot product of one
    filter with the aligned input window plus that filter's bias.
    """
    x = _as_float4d(x, "conv input")
    w = np.ascontiguousarray(w)
    b = np.ascontiguousarray(b)
    if w.ndim != 5:
        raise ShapeError(f"conv weights must be 5-D (F, C, KH, KW, KD), got ndim {w.ndim}")
    if w.shape[1] != x.shape[0]:
        raise ShapeError(f"conv weight channels {w.shape[1]} != input channels {x.shape[0]}")
    if b.shape != (w.shape[0],):
        raise ShapeError(f"conv bias shape {b.shape} != (filters,) = ({w.shape[0]},)")
    _check_dtypes(x, w, b)
    conv3d_output_shape(Shape4(*x.shape), w.shape[0], w.shape[2:])
    return _active.conv3d_forward(x, w, b)


def conv3d_backward(x, w, gy):
    """Gradients of conv3d_forward w.r.t. input, weights and bias."""
    x = _as_float4d(x, "conv input")
    w = np.ascontiguousarray(w)
    gy = _as_float4d(gy, "conv output gradient")
    expected = conv3d_output_shape(Shape4(*x.shape), w.shape[0], w.shape[2:])
    if tuple(gy.shape) != tuple(expected):
        raise ShapeError(f"conv output gradient shape {gy.shape} != expected {tuple(expected)}")
    _check_dtypes(x, w, gy)
    return _active.conv3d_backward(x, w, gy)


def maxpool3d_forward(x, window):
    """Max pooling with stride = window and truncating division.

    Returns (output, argmax) where argmax holds, per output element, the
    flat index into the input of the first maximal element of its window
    in row-major scan order.
    """
    x = _as_float4d(x, "pool input")
    _check_dtypes(x)
    pool3d_output_shape(Shape4(*x.shape), window)
    return _active.maxpool3d_forward(x, tuple(int(v) for v in window))


def maxpool3d_backward(argmax, gy, in_shape):
    """Route output gradients to the recorded argmax positions."""
    gy = _as_float4d(gy, "pool output gradient")
    argmax = np.ascontiguousarray(argmax, dtype=np.int64)
    if argmax.shape != gy.shape:
        raise ShapeError(f"pool argmax shape {argmax.shape} != output gradient shape {gy.shape}")
    _check_dtypes(gy)
    in_shape = tuple(int(v) for v in in_shape)
    if len(in_shape) != 4:
        raise ShapeError(f"pool input shape must have 4 axes, got {in_shape}")
    return _active.maxpool3d_backward(argmax, gy, in_shape)
