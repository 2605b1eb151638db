"""RMSProp with an epoch-boundary learning-rate decay."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class RmsPropState:
    acc: np.ndarray          # squared-gradient accumulator, one per parameter
    base_lr: float
    rho: float = 0.9
    eps: float = 1e-8
    decay_epoch: int = 100   # epoch index at which the rate drops
    decay_factor: float = 0.1
    epoch: int = 0

    def __post_init__(self):
        if np.any(self.acc < 0):
            raise ValueError("accumulator must be nonnegative")

    @property
    def lr(self) -> float:
        return self.base_lr * (self.decay_factor if self.epoch >= self.decay_epoch
                               else 1.0)


def rmsprop_init(n_params: int, lr: float, rho: float = 0.9,
                 decay_epoch: int = 100, decay_factor: float = 0.1) -> RmsPropState:
    return RmsPropState(np.zeros(n_params), lr, rho, decay_epoch=decay_epoch,
                        decay_factor=decay_factor)


def rmsprop_step(state: RmsPropState, params: np.ndarray,
                 grad: np.ndarray) -> tuple[RmsPropState, np.ndarray]:
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient")
    acc = state.rho * state.acc + (1.0 - state.rho) * grad * grad
    new_params = params - state.lr * grad / (np.sqrt(acc) + state.eps)
    if not np.all(np.isfinite(new_params)):
        raise FloatingPointError(
            f"non-finite parameter after step (lr={state.lr}, "
            f"|grad|max={np.abs(grad).max():.3e})")
    return replace(state, acc=acc), new_params


def at_epoch(state: RmsPropState, epoch: int) -> RmsPropState:
    return replace(state, epoch=epoch)
