"""Reference restorations: classic filters and training-based references.

The filters are the standard local-averaging answers; the training
references share the main loop so their budgets match the transport
objective exactly for a given seed.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from otdenoise.noise import gaussian_kernel
from otdenoise.scenes import DomainPair
from otdenoise.training import TrainResult, TrainSettings, train


def baseline_identity(x: np.ndarray) -> np.ndarray:
    return np.array(x, copy=True)


def baseline_gaussian_filter(x: np.ndarray, sigma_f: float = 1.0) -> np.ndarray:
    """Gaussian smoothing with reflect padding; kernel spans 3 sigma."""
    size = 2 * int(np.ceil(3 * sigma_f)) + 1
    if size > min(x.shape):
        raise ValueError(f"kernel {size} exceeds patch {x.shape}")
    kernel = gaussian_kernel(size, sigma_f)
    return ndimage.convolve(x, kernel, mode="reflect")


def baseline_median_filter(x: np.ndarray, k: int = 3) -> np.ndarray:
    if k > min(x.shape):
        raise ValueError(f"kernel {k} exceeds patch {x.shape}")
    return ndimage.median_filter(x, size=k, mode="reflect")


def train_n2c(settings: TrainSettings, domains: DomainPair,
              val: DomainPair) -> TrainResult:
    """Supervised reference: L1 regression onto paired clean targets."""
    return train(settings, domains, val, mode="n2c")


def train_n2n(settings: TrainSettings, domains: DomainPair,
              val: DomainPair) -> TrainResult:
    """Noisy-pair reference: L1 regression onto a second degradation."""
    return train(settings, domains, val, mode="n2n")


def train_dist_only(settings: TrainSettings, domains: DomainPair,
                    val: DomainPair) -> TrainResult:
    """Distribution matching alone; the degeneration reference."""
    return train(settings, domains, val, mode="dist_only")
