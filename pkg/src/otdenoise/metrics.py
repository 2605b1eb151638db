"""Distortion and distribution metrics.

PSNR and a windowed SSIM measure per-image distortion; ``patchset_w1``
measures how far a whole set of patches sits from a clean reference set
as an exact transport distance between the two empirical measures, the
same quantity the training penalty minimizes.

Identical images report PSNR as the +inf sentinel (a genuine float
infinity, written as ``inf`` in reports), never NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from otdenoise.measures import CostSpec, EmpiricalMeasure
from otdenoise.solvers import kantorovich_lp


@dataclass(frozen=True)
class MetricsReport:
    psnr_db: float
    ssim: float
    w1_to_clean: float
    fidelity_to_noisy: float


def psnr(x: np.ndarray, y: np.ndarray, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE); +inf when the images are identical."""
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((np.asarray(x, dtype=np.float64) - y) ** 2))
    if mse == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / mse))


def ssim(x: np.ndarray, y: np.ndarray, window: int = 8, k1: float = 0.01,
         k2: float = 0.03, peak: float = 1.0) -> float:
    """Mean local SSIM over all dense sliding windows.

    Uniform windows; the window must fit inside the patch.  Luminance,
    contrast and structure enter through the standard two-term form.
    """
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if window > min(x.shape):
        raise ValueError(f"window {window} exceeds patch {x.shape}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    wx = np.lib.stride_tricks.sliding_window_view(x, (window, window))
    wy = np.lib.stride_tricks.sliding_window_view(y, (window, window))
    mx = wx.mean(axis=(2, 3))
    my = wy.mean(axis=(2, 3))
    vx = wx.var(axis=(2, 3))
    vy = wy.var(axis=(2, 3))
    cov = (wx * wy).mean(axis=(2, 3)) - mx * my
    c1 = (k1 * peak) ** 2
    c2 = (k2 * peak) ** 2
    s = ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx ** 2 + my ** 2 + c1)
                                                 * (vx + vy + c2))
    return float(s.mean())


def patchset_w1(a, b, subsample: int | None = 64, seed: int = 0) -> float:
    """Exact W1 between the empirical measures of two patch sets.

    Patches are flattened to vectors; when a set exceeds ``subsample``
    a seeded random subset is used so the LP stays small.
    """
    if len(a) == 0 or len(b) == 0:
        raise ValueError("patch sets must be non-empty")
    rng = np.random.default_rng(seed)

    def pick(patches):
        if subsample is not None and len(patches) > subsample:
            idx = rng.choice(len(patches), size=subsample, replace=False)
            patches = [patches[i] for i in idx]
        return patches

    ma = EmpiricalMeasure.from_patches(pick(a))
    mb = EmpiricalMeasure.from_patches(pick(b))
    _, value = kantorovich_lp(ma, mb, CostSpec(beta=1.0))
    return value


def mean_displacement(outputs, inputs) -> float:
    """Mean Euclidean distance between paired flattened patches."""
    return float(np.mean([
        np.linalg.norm(np.ravel(o) - np.ravel(i))
        for o, i in zip(outputs, inputs)
    ]))


def evaluate_outputs(outputs, clean, noisy, subsample: int | None = 64,
                     seed: int = 0) -> MetricsReport:
    """Bundle the four standard numbers for a method's outputs."""
    psnrs = [psnr(c, o) for c, o in zip(clean, outputs)]
    ssims = [ssim(c, o) for c, o in zip(clean, outputs)]
    return MetricsReport(
        psnr_db=float(np.mean(psnrs)),
        ssim=float(np.mean(ssims)),
        w1_to_clean=patchset_w1(outputs, clean, subsample, seed),
        fidelity_to_noisy=mean_displacement(outputs, noisy),
    )
