"""Training objectives for the denoiser.

The main objective couples an input-fidelity term (mean Euclidean
displacement of each output from its own input, raised to ``beta``)
with ``lam`` times the exact Wasserstein-1 distance between the batch
of outputs and an unpaired batch of clean patches, computed by the
transport LP.  The W1 term is differentiated through the optimal
coupling held fixed (an envelope subgradient); coincident points
contribute a zero vector.

Supervised references (clean or second-noisy targets) use a per-pixel
L1 loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from otdenoise.measures import Coupling, CostSpec, EmpiricalMeasure
from otdenoise.nets import backward, forward
from otdenoise.solvers import kantorovich_lp

PENALTY_MODES = ("exact_minibatch_w1", "critic_wgan_gp")


@dataclass(frozen=True)
class LossSpec:
    lam: float
    beta: float = 1.0
    fidelity_weight: float = 1.0  # 0 gives the distribution-only objective
    penalty_mode: str = "exact_minibatch_w1"
    gp_weight: float = 10.0
    critic_steps: int = 5
    critic_hidden: int = 64

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.penalty_mode not in PENALTY_MODES:
            raise ValueError(f"unknown penalty mode {self.penalty_mode!r}")
        if self.penalty_mode == "critic_wgan_gp" and self.gp_weight <= 0:
            raise ValueError("gp_weight must be positive in critic mode")


@dataclass(frozen=True)
class LossResult:
    value: float
    grad: np.ndarray
    fidelity: float
    w1: float
    coupling: Coupling | None


def fidelity_and_grad(z: np.ndarray, y: np.ndarray, beta: float):
    """Mean ||z_b - y_b||^beta over the batch and its gradient in z."""
    b = z.shape[0]
    diff = (z - y).reshape(b, -1)
    norms = np.linalg.norm(diff, axis=1)
    value = float(np.mean(norms ** beta))
    grad = np.zeros_like(diff)
    nz = norms > 0
    grad[nz] = (beta * norms[nz, None] ** (beta - 2.0)) * diff[nz]
    return value, grad.reshape(z.shape) / b


def loss_and_grad(params: np.ndarray, spec: tuple, loss: LossSpec,
                  noisy_batch: np.ndarray, clean_batch: np.ndarray,
                  coupling: Coupling | None = None) -> LossResult:
    """Objective value and flat parameter gradient on one batch pair.

    ``noisy_batch`` and ``clean_batch`` are (B, 1, H, W) arrays of equal
    batch size drawn independently of each other.  When ``coupling`` is
    given, the W1 term is evaluated through that fixed plan instead of
    re-solving the LP; this is the surface finite-difference checks use,
    since the analytic gradient holds the plan fixed.
    """
    if noisy_batch.shape[0] != clean_batch.shape[0]:
        raise ValueError(
            f"batch size mismatch: {noisy_batch.shape[0]} vs {clean_batch.shape[0]}")
    b = noisy_batch.shape[0]
    z, acts = forward(params, spec, noisy_batch)
    fid, gz = fidelity_and_grad(z, noisy_batch, loss.beta)
    gz = loss.fidelity_weight * gz

    zf = z.reshape(b, -1)
    xf = clean_batch.reshape(b, -1)
    if loss.lam > 0:
        if coupling is None:
            coupling, w1 = kantorovich_lp(EmpiricalMeasure.uniform(zf),
                                          EmpiricalMeasure.uniform(xf),
                                          CostSpec(beta=1.0))
        else:
            w1 = float(np.sum(coupling.plan * np.linalg.norm(
                zf[:, None, :] - xf[None, :, :], axis=2)))
        diff = zf[:, None, :] - xf[None, :, :]
        norms = np.linalg.norm(diff, axis=2)
        safe = np.where(norms > 0, norms, 1.0)
        gw1 = np.einsum("ij,ijk->ik", coupling.plan / safe * (norms > 0), diff)
        gz = gz + loss.lam * gw1.reshape(z.shape)
    else:
        w1 = 0.0
        coupling = None

    _, gparams = backward(params, spec, noisy_batch, acts, gz)
    value = loss.fidelity_weight * fid + loss.lam * w1
    return LossResult(value, gparams, fid, w1, coupling)


def loss_value_fixed_coupling(params: np.ndarray, spec: tuple, loss: LossSpec,
                              noisy_batch: np.ndarray, clean_batch: np.ndarray,
                              coupling: Coupling | None) -> float:
    """Objective value with the transport plan frozen (no LP re-solve)."""
    b = noisy_batch.shape[0]
    z, _ = forward(params, spec, noisy_batch)
    fid, _ = fidelity_and_grad(z, noisy_batch, loss.beta)
    value = loss.fidelity_weight * fid
    if loss.lam > 0 and coupling is not None:
        zf = z.reshape(b, -1)
        xf = clean_batch.reshape(b, -1)
        norms = np.linalg.norm(zf[:, None, :] - xf[None, :, :], axis=2)
        value += loss.lam * float(np.sum(coupling.plan * norms))
    return value


def l1_loss_and_grad(params: np.ndarray, spec: tuple,
                     in_batch: np.ndarray, target_batch: np.ndarray):
    """Per-pixel mean absolute error to a paired target batch."""
    if in_batch.shape != target_batch.shape:
        raise ValueError("paired batches must share a shape")
    z, acts = forward(params, spec, in_batch)
    diff = z - target_batch
    value = float(np.mean(np.abs(diff)))
    gz = np.sign(diff) / diff.size
    _, gparams = backward(params, spec, in_batch, acts, gz)
    return value, gparams
