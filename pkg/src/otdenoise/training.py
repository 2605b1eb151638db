"""Training loop shared by the transport objective and the references.

Modes:

* ``ot``        fidelity + lam * exact minibatch W1 to unpaired clean batches
                (or the critic surrogate when the loss spec asks for it)
* ``dist_only`` the W1 penalty alone, no fidelity anchor
* ``n2c``       per-pixel L1 to paired clean targets
* ``n2n``       per-pixel L1 to a second independent degradation

All modes share initialization, batch schedule and optimizer settings
for a given seed, so their end metrics are directly comparable.  With
the exact-W1 penalty the loop is fully deterministic given the seed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from otdenoise.critic import (
    CriticSpec,
    critic_init,
    critic_loss_and_grads,
    critic_scores,
    generator_penalty_grad,
)
from otdenoise.errors import TrainingDivergedError
from otdenoise.losses import (
    LossSpec,
    fidelity_and_grad,
    l1_loss_and_grad,
    loss_and_grad,
)
from otdenoise.metrics import psnr
from otdenoise.nets import (
    backward,
    batch_from_patches,
    forward,
    init_params,
    param_layout,
    validate_net,
)
from otdenoise.noise import apply_noise, derive_seed
from otdenoise.optim import at_epoch, rmsprop_init, rmsprop_step
from otdenoise.scenes import DomainPair

logger = logging.getLogger(__name__)

MODES = ("ot", "dist_only", "n2c", "n2n")
DIVERGENCE_LIMIT = 1e6

_INIT_TAG = 101
_ORDER_TAG = 202
_CRITIC_TAG = 303
_N2N_TAG = 404


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    fidelity: float       # mean ||y - f(y)|| over the epoch's batches
    w1_term: float        # mean minibatch W1 (nan for supervised modes)
    val_psnr: float


@dataclass(frozen=True)
class TrainResult:
    params: np.ndarray
    spec: tuple
    mode: str
    curve: list


@dataclass(frozen=True)
class TrainSettings:
    spec: tuple
    loss: LossSpec
    epochs: int = 200
    batch_size: int = 16
    lr: float = 1e-3
    rho: float = 0.9
    decay_epoch: int = 100
    decay_factor: float = 0.1
    critic_lr: float = 5e-4
    seed: int = 0


def _mean_displacement(z: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.linalg.norm((z - y).reshape(z.shape[0], -1), axis=1)))


def _val_psnr(params, spec, val: DomainPair) -> float:
    noisy = batch_from_patches(val.noisy_patches)
    out, _ = forward(params, spec, noisy)
    out = np.clip(out, 0.0, 1.0)
    vals = [psnr(val.clean_of_noisy[i], out[i, 0]) for i in range(out.shape[0])]
    return float(np.mean(vals))


def train(settings: TrainSettings, domains: DomainPair, val: DomainPair,
          mode: str = "ot") -> TrainResult:
    """Run one training and return final parameters plus the epoch curve."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    if mode in ("n2c", "n2n") and not domains.paired:
        raise ValueError(f"mode {mode!r} needs paired domains")
    if mode == "n2n" and domains.noisy_alt is None and domains.noise_spec is None:
        raise ValueError("mode 'n2n' needs a second noisy realization")
    spec = settings.spec
    patch_shape = np.asarray(domains.noisy_patches[0]).shape
    validate_net(spec, (1,) + patch_shape)

    params = init_params(spec, derive_seed(settings.seed, _INIT_TAG))
    _, n_params = param_layout(spec)
    state = rmsprop_init(n_params, settings.lr, settings.rho,
                         settings.decay_epoch, settings.decay_factor)
    order_rng = np.random.default_rng(derive_seed(settings.seed, _ORDER_TAG))

    noisy = batch_from_patches(domains.noisy_patches)
    clean = batch_from_patches(domains.clean_patches)
    targets = None
    if mode == "n2c":
        targets = batch_from_patches(domains.clean_of_noisy)
    elif mode == "n2n":
        targets = batch_from_patches(domains.noisy_alt)

    loss_spec = settings.loss
    if mode == "dist_only":
        loss_spec = replace(loss_spec, fidelity_weight=0.0)

    use_critic = (mode in ("ot", "dist_only")
                  and loss_spec.penalty_mode == "critic_wgan_gp")
    critic = None
    if use_critic:
        cspec = CriticSpec(in_dim=int(np.prod(patch_shape)),
                           hidden=loss_spec.critic_hidden)
        critic = _CriticLoop(
            cspec,
            critic_init(cspec, derive_seed(settings.seed, _CRITIC_TAG)),
            rmsprop_init(_layout_size(cspec), settings.critic_lr, settings.rho,
                         settings.decay_epoch, settings.decay_factor),
            np.random.default_rng(derive_seed(settings.seed, _CRITIC_TAG + 1)),
            loss_spec,
        )

    b = settings.batch_size
    n_batches = min(len(noisy), len(clean)) // b
    if n_batches < 1:
        raise ValueError("dataset smaller than one batch")

    curve = []
    for epoch in range(settings.epochs):
        state = at_epoch(state, epoch)
        if critic is not None:
            critic.state = at_epoch(critic.state, epoch)
        if mode == "n2n":
            # fresh target realizations each epoch: a single fixed second
            # realization would be memorized at this data scale, which is
            # not the regime noisy-pair training emulates
            targets = _resample_noisy_targets(domains, settings.seed, epoch)
        noisy_order = order_rng.permutation(len(noisy))[:n_batches * b]
        clean_order = order_rng.permutation(len(clean))[:n_batches * b]
        ep_loss = ep_fid = ep_w1 = 0.0
        for k in range(n_batches):
            nb = noisy[noisy_order[k * b:(k + 1) * b]]
            cb = clean[clean_order[k * b:(k + 1) * b]]
            if mode in ("n2c", "n2n"):
                tb = targets[noisy_order[k * b:(k + 1) * b]]
                value, grad = l1_loss_and_grad(params, spec, nb, tb)
                z, _ = forward(params, spec, nb)
                fid, w1 = _mean_displacement(z, nb), float("nan")
            elif use_critic:
                value, grad, fid, w1 = critic.step(params, spec, nb, cb,
                                                   noisy, clean)
            else:
                res = loss_and_grad(params, spec, loss_spec, nb, cb)
                value, grad, fid, w1 = res.value, res.grad, res.fidelity, res.w1
            state, params = rmsprop_step(state, params, grad)
            ep_loss += value
            ep_fid += fid
            ep_w1 += w1
        rec = EpochRecord(epoch, ep_loss / n_batches, ep_fid / n_batches,
                          ep_w1 / n_batches, _val_psnr(params, spec, val))
        curve.append(rec)
        if not np.isfinite(rec.train_loss) or rec.train_loss > DIVERGENCE_LIMIT:
            raise TrainingDivergedError(
                f"loss {rec.train_loss!r} at epoch {epoch}", curve)
        if epoch % 50 == 0 or epoch == settings.epochs - 1:
            logger.debug("mode=%s epoch=%d loss=%.5f fid=%.5f w1=%.5f psnr=%.2f",
                         mode, epoch, rec.train_loss, rec.fidelity, rec.w1_term,
                         rec.val_psnr)
    return TrainResult(params, spec, mode, curve)


def _layout_size(cspec: CriticSpec) -> int:
    return cspec.hidden * cspec.in_dim + cspec.hidden + cspec.hidden + 1


def _resample_noisy_targets(domains: DomainPair, seed: int,
                            epoch: int) -> np.ndarray:
    if domains.noise_spec is None:
        return batch_from_patches(domains.noisy_alt)
    spec = replace(domains.noise_spec, seed=derive_seed(seed, _N2N_TAG + epoch))
    return batch_from_patches([
        apply_noise(p, spec, i) for i, p in enumerate(domains.clean_of_noisy)
    ])


class _CriticLoop:
    """Alternating critic/generator updates for the adversarial penalty."""

    def __init__(self, cspec, params, state, rng, loss_spec):
        self.cspec = cspec
        self.params = params
        self.state = state
        self.rng = rng
        self.loss_spec = loss_spec

    def step(self, params, spec, nb, cb, noisy, clean):
        bsz = nb.shape[0]
        for _ in range(self.loss_spec.critic_steps):
            ni = self.rng.integers(0, len(noisy), size=bsz)
            ci = self.rng.integers(0, len(clean), size=bsz)
            z, _ = forward(params, spec, noisy[ni])
            res = critic_loss_and_grads(self.params, self.cspec,
                                        z.reshape(bsz, -1),
                                        clean[ci].reshape(bsz, -1),
                                        self.loss_spec.gp_weight, self.rng)
            self.state, self.params = rmsprop_step(self.state, self.params,
                                                   res.grad)
        z, acts = forward(params, spec, nb)
        fid, gz = fidelity_and_grad(z, nb, self.loss_spec.beta)
        gz = self.loss_spec.fidelity_weight * gz
        pen, gz_pen = generator_penalty_grad(self.params, self.cspec,
                                             z.reshape(bsz, -1))
        gz = gz + self.loss_spec.lam * gz_pen.reshape(z.shape)
        _, grad = backward(params, spec, nb, acts, gz)
        value = self.loss_spec.fidelity_weight * fid + self.loss_spec.lam * pen
        zf = z.reshape(bsz, -1)
        w1_est = float(critic_scores(self.params, self.cspec,
                                     cb.reshape(bsz, -1)).mean()
                       - critic_scores(self.params, self.cspec, zf).mean())
        return value, grad, fid, w1_est
