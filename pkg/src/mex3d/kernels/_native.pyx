# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled conv3d/maxpool3d kernels; contracts identical to numpy_backend.

Loops keep a fixed accumulation order so results are reproducible
run to run. Inner loops run over the contiguous temporal axis.
"""

import numpy as np

cimport numpy as cnp

name = "cython"

ctypedef fused real:
    float
    double


def conv3d_forward(real[:, :, :, ::1] x, real[:, :, :, :, ::1] w, real[::1] b):
    cdef Py_ssize_t F = w.shape[0], C = w.shape[1]
    cdef Py_ssize_t KH = w.shape[2], KW = w.shape[3], KD = w.shape[4]
    cdef Py_ssize_t H = x.shape[1], W = x.shape[2], D = x.shape[3]
    cdef Py_ssize_t OH = H - KH + 1, OW = W - KW + 1, OD = D - KD + 1
    if real is float:
        out_np = np.empty((F, OH, OW, OD), dtype=np.float32)
    else:
        out_np = np.empty((F, OH, OW, OD), dtype=np.float64)
    cdef real[:, :, :, ::1] out = out_np
    cdef Py_ssize_t f, c, i, j, k, oy, ox, ot
    cdef real wv, bv

    for f in range(F):
        bv = b[f]
        for oy in range(OH):
            for ox in range(OW):
                for ot in range(OD):
                    out[f, oy, ox, ot] = bv
        for c in range(C):
            for i in range(KH):
                for j in range(KW):
                    for k in range(KD):
                        wv = w[f, c, i, j, k]
                        for oy in range(OH):
                            for ox in range(OW):
                                for ot in range(OD):
                                    out[f, oy, ox, ot] += wv * x[c, oy + i, ox + j, ot + k]
    return out_np


def conv3d_backward(real[:, :, :, ::1] x, real[:, :, :, :, ::1] w, real[:, :, :, ::1] gy):
    cdef Py_ssize_t F = w.shape[0], C = w.shape[1]
    cdef Py_ssize_t KH = w.shape[2], KW = w.shape[3], KD = w.shape[4]
    cdef Py_ssize_t H = x.shape[1], W = x.shape[2], D = x.shape[3]
    cdef Py_ssize_t OH = gy.shape[1], OW = gy.shape[2], OD = gy.shape[3]
    if real is float:
        dtype = np.float32
    else:
        dtype = np.float64
    gx_np = np.zeros((C, H, W, D), dtype=dtype)
    gw_np = np.zeros((F, C, KH, KW, KD), dtype=dtype)
    gb_np = np.zeros(F, dtype=dtype)
    cdef real[:, :, :, ::1] gx = gx_np
    cdef real[:, :, :, :, ::1] gw = gw_np
    cdef real[::1] gb = gb_np
    cdef Py_ssize_t f, c, i, j, k, oy, ox, ot
    cdef real acc, wv

    for f in range(F):
        acc = 0
        for oy in range(OH):
            for ox in range(OW):
                for ot in range(OD):
                    acc += gy[f, oy, ox, ot]
        gb[f] = acc
        for c in range(C):
            for i in range(KH):
                for j in range(KW):
                    for k in range(KD):
                        acc = 0
                        wv = w[f, c, i, j, k]
                        for oy in range(OH):
                            for ox in range(OW):
                                for ot in range(OD):
                                    acc += gy[f, oy, ox, ot] * x[c, oy + i, ox + j, ot + k]
                                    gx[c, oy + i, ox + j, ot + k] += wv * gy[f, oy, ox, ot]
                        gw[f, c, i, j, k] = acc
    return gx_np, gw_np, gb_np


def maxpool3d_forward(real[:, :, :, ::1] x, window):
    cdef Py_ssize_t ph = window[0], pw = window[1], pd = window[2]
    cdef Py_ssize_t C = x.shape[0], H = x.shape[1], W = x.shape[2], D = x.shape[3]
    cdef Py_ssize_t OH = H // ph, OW = W // pw, OD = D // pd
    if real is float:
        out_np = np.empty((C, OH, OW, OD), dtype=np.float32)
    else:
        out_np = np.empty((C, OH, OW, OD), dtype=np.float64)
    am_np = np.empty((C, OH, OW, OD), dtype=np.int64)
    cdef real[:, :, :, ::1] out = out_np
    cdef cnp.int64_t[:, :, :, ::1] am = am_np
    cdef Py_ssize_t c, oy, ox, ot, i, j, k, by, bx, bt
    cdef real best, v
    cdef Py_ssize_t besti

    for c in range(C):
        for oy in range(OH):
            for ox in range(OW):
                for ot in range(OD):
                    by = oy * ph
                    bx = ox * pw
                    bt = ot * pd
                    best = x[c, by, bx, bt]
                    besti = ((c * H + by) * W + bx) * D + bt
                    for i in range(ph):
                        for j in range(pw):
                            for k in range(pd):
                                v = x[c, by + i, bx + j, bt + k]
                                if v > best:
                                    best = v
                                    besti = ((c * H + by + i) * W + bx + j) * D + bt + k
                    out[c, oy, ox, ot] = best
                    am[c, oy, ox, ot] = besti
    return out_np, am_np


def maxpool3d_backward(argmax, real[:, :, :, ::1] gy, in_shape):
    if real is float:
        gx_np = np.zeros(in_shape, dtype=np.float32)
    else:
        gx_np = np.zeros(in_shape, dtype=np.float64)
    cdef real[::1] flat = gx_np.ravel()
    cdef cnp.int64_t[::1] idx = np.ascontiguousarray(argmax, dtype=np.int64).ravel()
    cdef real[::1] g = np.ascontiguousarray(gy).ravel()
    cdef Py_ssize_t n = idx.shape[0], i

    for i in range(n):
        flat[idx[i]] += g[i]
    return gx_np
