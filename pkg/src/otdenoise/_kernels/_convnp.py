"""Pure-NumPy fallback for the convolution kernels.

Same contract as the compiled module: zero padding of k//2, square
kernels, arbitrary stride, float64 throughout.  Decomposes the
convolution into k*k strided slices so the inner work stays in BLAS.
"""

import numpy as np


def _out_size(n: int, k: int, stride: int) -> int:
    return (n + 2 * (k // 2) - k) // stride + 1


def conv2d_fwd(x: np.ndarray, w: np.ndarray, stride: int) -> np.ndarray:
    B, Ci, H, W = x.shape
    Co, _, k, _ = w.shape
    p = k // 2
    Ho, Wo = _out_size(H, k, stride), _out_size(W, k, stride)
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    y = np.zeros((B, Co, Ho, Wo))
    for ki in range(k):
        for kj in range(k):
            xs = xp[:, :, ki:ki + (Ho - 1) * stride + 1:stride,
                    kj:kj + (Wo - 1) * stride + 1:stride]
            y += np.einsum("bihw,oi->bohw", xs, w[:, :, ki, kj])
    return y


def conv2d_bwd_input(gy: np.ndarray, w: np.ndarray, stride: int,
                     H: int, W: int) -> np.ndarray:
    B, Co, Ho, Wo = gy.shape
    _, Ci, k, _ = w.shape
    p = k // 2
    gxp = np.zeros((B, Ci, H + 2 * p, W + 2 * p))
    for ki in range(k):
        for kj in range(k):
            gxp[:, :, ki:ki + (Ho - 1) * stride + 1:stride,
                kj:kj + (Wo - 1) * stride + 1:stride] += np.einsum(
                    "bohw,oi->bihw", gy, w[:, :, ki, kj])
    return gxp[:, :, p:p + H, p:p + W]


def conv2d_bwd_weights(x: np.ndarray, gy: np.ndarray, stride: int,
                       k: int) -> np.ndarray:
    B, Ci, H, W = x.shape
    Co, Ho, Wo = gy.shape[1], gy.shape[2], gy.shape[3]
    p = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    gw = np.zeros((Co, Ci, k, k))
    for ki in range(k):
        for kj in range(k):
            xs = xp[:, :, ki:ki + (Ho - 1) * stride + 1:stride,
                    kj:kj + (Wo - 1) * stride + 1:stride]
            gw[:, :, ki, kj] = np.einsum("bohw,bihw->oi", gy, xs)
    return gw
