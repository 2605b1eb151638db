"""Degradation synthesis: white Gaussian, Poisson, and brown Gaussian noise.

Patches are 2-D float64 arrays with pixel values in [0, 1].  Every
degradation is driven by a per-patch RNG derived from the spec seed and
the patch index through a splitmix64 mix, so results are bit-identical
under any parallel schedule.  Clipping to [0, 1] is explicit: off for
training-pair synthesis (it would break the zero-mean property), on for
display and metric images.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

KINDS = ("gaussian", "poisson", "brown_gaussian")

_GOLDEN = 0x9E3779B97F4A7C15
_MASK = 0xFFFFFFFFFFFFFFFF


def splitmix64(z: int) -> int:
    """One splitmix64 step: advance by the golden gamma, then finalize."""
    z = (z + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(seed: int, index: int) -> int:
    """Per-item seed: splitmix64 of (seed XOR index)."""
    return splitmix64((seed & _MASK) ^ (index & _MASK))


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    sigma: float = 25.0 / 255.0
    lambda_p: float = 30.0
    kernel_size: int = 5
    kernel_sigma: float = 1.0
    clip: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected one of {KINDS}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.lambda_p <= 0:
            raise ValueError("lambda_p must be > 0")
        if self.kernel_size < 3 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd and >= 3")


def _rng_for(spec: NoiseSpec, patch_index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(spec.seed, patch_index))


def _finish(y: np.ndarray, clip: bool) -> np.ndarray:
    return np.clip(y, 0.0, 1.0) if clip else y


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """Normalized 2-D Gaussian tap matrix, entries ~ exp(-(i^2+j^2)/(2 sigma^2))."""
    if size % 2 == 0:
        raise ValueError("size must be odd")
    if size > 1 and sigma <= 0:
        raise ValueError("sigma must be positive")
    half = size // 2
    coords = np.arange(-half, half + 1, dtype=np.float64)
    if size == 1:
        return np.ones((1, 1))
    g = np.exp(-(coords[:, None] ** 2 + coords[None, :] ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def add_gaussian(x: np.ndarray, spec: NoiseSpec, patch_index: int = 0) -> np.ndarray:
    """y = x + n with n ~ N(0, sigma^2) i.i.d. per pixel."""
    if spec.kind != "gaussian":
        raise ValueError(f"spec kind is {spec.kind!r}, expected 'gaussian'")
    rng = _rng_for(spec, patch_index)
    n = spec.sigma * rng.standard_normal(x.shape)
    return _finish(x + n, spec.clip)


def add_poisson(x: np.ndarray, spec: NoiseSpec, patch_index: int = 0) -> np.ndarray:
    """y = Poisson(lambda_p * x) / lambda_p per pixel; zero input stays zero."""
    if spec.kind != "poisson":
        raise ValueError(f"spec kind is {spec.kind!r}, expected 'poisson'")
    rng = _rng_for(spec, patch_index)
    rates = np.maximum(spec.lambda_p * x, 0.0)
    y = rng.poisson(rates).astype(np.float64) / spec.lambda_p
    return _finish(y, spec.clip)


def add_brown_gaussian(x: np.ndarray, spec: NoiseSpec, patch_index: int = 0) -> np.ndarray:
    """y = x + low-pass filtered white Gaussian noise.

    The white field is sampled on a grid extended by the kernel radius
    and cropped to the valid region after filtering, so every output
    pixel is a filter response to genuinely independent samples.  The
    rescaling by 1/sqrt(sum of squared taps) then makes the field
    variance exactly the pre-filter sigma^2, keeping noise strengths
    comparable across kinds.
    """
    if spec.kind != "brown_gaussian":
        raise ValueError(f"spec kind is {spec.kind!r}, expected 'brown_gaussian'")
    rng = _rng_for(spec, patch_index)
    half = spec.kernel_size // 2
    h, w = x.shape
    white = spec.sigma * rng.standard_normal((h + 2 * half, w + 2 * half))
    kernel = gaussian_kernel(spec.kernel_size, spec.kernel_sigma)
    n = ndimage.convolve(white, kernel, mode="reflect")[half:half + h, half:half + w]
    n /= np.sqrt(np.sum(kernel ** 2))
    return _finish(x + n, spec.clip)


_DISPATCH = {
    "gaussian": add_gaussian,
    "poisson": add_poisson,
    "brown_gaussian": add_brown_gaussian,
}


def apply_noise(x: np.ndarray, spec: NoiseSpec, patch_index: int = 0) -> np.ndarray:
    return _DISPATCH[spec.kind](x, spec, patch_index)


@dataclass(frozen=True)
class NoiseAudit:
    """Empirical statistics of a noise model against its nominal ones."""

    kind: str
    mean_abs: float          # |mean of n| over all pixels
    mean_tol: float          # 3 standard errors for the mean
    var_ratio: float         # empirical variance / nominal variance
    lag1_autocorr: float     # spatial lag-1 autocorrelation of n
    passed: bool


def _noise_fields(spec: NoiseSpec, n_patches: int, size: int) -> np.ndarray:
    base = np.full((size, size), 0.5)
    return np.stack([apply_noise(base, spec, i) - base for i in range(n_patches)])


def audit_noise(spec: NoiseSpec, n_patches: int = 100, size: int = 64) -> NoiseAudit:
    """Check mean preservation, variance calibration, and spatial correlation.

    Bounds: |mean| within 3 standard errors of zero; variance within 20%
    of nominal for Poisson and 5% for brown vs white Gaussian; lag-1
    autocorrelation > 0.5 for brown noise and < 0.05 for white noise.
    """
    if spec.clip:
        raise ValueError("audit requires clip=False (clipping biases the mean)")
    fields = _noise_fields(spec, n_patches, size)
    if spec.kind == "poisson":
        nominal_var = 0.5 / spec.lambda_p
    else:
        nominal_var = spec.sigma ** 2
    mean = float(fields.mean())
    # standard error from independent per-patch means (pixels within a
    # patch may be spatially correlated)
    patch_means = fields.mean(axis=(1, 2))
    se = float(patch_means.std(ddof=1) / np.sqrt(len(patch_means)))
    var_ratio = float(fields.var(ddof=1) / nominal_var)
    a = fields[:, :, :-1] * fields[:, :, 1:]
    lag1 = float(a.mean() / fields.var())

    ok_mean = abs(mean) <= 3 * se
    if spec.kind == "poisson":
        ok_var = abs(var_ratio - 1.0) <= 0.20
        ok_corr = abs(lag1) < 0.05
    elif spec.kind == "brown_gaussian":
        ok_var = abs(var_ratio - 1.0) <= 0.05
        ok_corr = lag1 > 0.5
    else:
        ok_var = abs(var_ratio - 1.0) <= 0.05
        ok_corr = abs(lag1) < 0.05
    return NoiseAudit(spec.kind, abs(mean), 3 * se, var_ratio, lag1,
                      ok_mean and ok_var and ok_corr)
