# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled 2-D convolution kernels (forward and both adjoints).

Zero padding of k//2 on each side, square kernels, arbitrary stride.
All arrays are C-contiguous float64.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv2d_fwd(double[:, :, :, ::1] x, double[:, :, :, ::1] w, int stride):
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t Co = w.shape[0], k = w.shape[2]
    cdef Py_ssize_t p = k // 2
    cdef Py_ssize_t Ho = (H + 2 * p - k) // stride + 1
    cdef Py_ssize_t Wo = (W + 2 * p - k) // stride + 1
    y_arr = np.zeros((B, Co, Ho, Wo), dtype=np.float64)
    cdef double[:, :, :, ::1] y = y_arr
    cdef Py_ssize_t b, co, ci, oh, ow, ki, kj, ih, iw
    cdef double acc
    for b in range(B):
        for co in range(Co):
            for oh in range(Ho):
                for ow in range(Wo):
                    acc = 0.0
                    for ci in range(Ci):
                        for ki in range(k):
                            ih = oh * stride + ki - p
                            if ih < 0 or ih >= H:
                                continue
                            for kj in range(k):
                                iw = ow * stride + kj - p
                                if iw < 0 or iw >= W:
                                    continue
                                acc += x[b, ci, ih, iw] * w[co, ci, ki, kj]
                    y[b, co, oh, ow] = acc
    return y_arr


def conv2d_bwd_input(double[:, :, :, ::1] gy, double[:, :, :, ::1] w, int stride,
                     Py_ssize_t H, Py_ssize_t W):
    cdef Py_ssize_t B = gy.shape[0], Co = gy.shape[1], Ho = gy.shape[2], Wo = gy.shape[3]
    cdef Py_ssize_t Ci = w.shape[1], k = w.shape[2]
    cdef Py_ssize_t p = k // 2
    gx_arr = np.zeros((B, Ci, H, W), dtype=np.float64)
    cdef double[:, :, :, ::1] gx = gx_arr
    cdef Py_ssize_t b, co, ci, oh, ow, ki, kj, ih, iw
    cdef double g
    for b in range(B):
        for co in range(Co):
            for oh in range(Ho):
                for ow in range(Wo):
                    g = gy[b, co, oh, ow]
                    if g == 0.0:
                        continue
                    for ci in range(Ci):
                        for ki in range(k):
                            ih = oh * stride + ki - p
                            if ih < 0 or ih >= H:
                                continue
                            for kj in range(k):
                                iw = ow * stride + kj - p
                                if iw < 0 or iw >= W:
                                    continue
                                gx[b, ci, ih, iw] += g * w[co, ci, ki, kj]
    return gx_arr


def conv2d_bwd_weights(double[:, :, :, ::1] x, double[:, :, :, ::1] gy, int stride,
                       Py_ssize_t k):
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], H = x.shape[2], W = x.shape[3]
    cdef Py_ssize_t Co = gy.shape[1], Ho = gy.shape[2], Wo = gy.shape[3]
    cdef Py_ssize_t p = k // 2
    gw_arr = np.zeros((Co, Ci, k, k), dtype=np.float64)
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef Py_ssize_t b, co, ci, oh, ow, ki, kj, ih, iw
    cdef double g
    for b in range(B):
        for co in range(Co):
            for oh in range(Ho):
                for ow in range(Wo):
                    g = gy[b, co, oh, ow]
                    if g == 0.0:
                        continue
                    for ci in range(Ci):
                        for ki in range(k):
                            ih = oh * stride + ki - p
                            if ih < 0 or ih >= H:
                                continue
                            for kj in range(k):
                                iw = ow * stride + kj - p
                                if iw < 0 or iw >= W:
                                    continue
                                gw[co, ci, ki, kj] += g * x[b, ci, ih, iw]
    return gw_arr
