"""WGAN-gp critic: the adversarial surrogate for the W1 penalty.

The critic is a small leaky-relu MLP on flattened patches, trained to
separate clean patches from denoiser outputs under a gradient penalty
that pushes its input-gradient norm toward 1.  Its value difference
``mean D(real) - mean D(fake)`` then estimates the Wasserstein-1
distance, mirroring adversarial training at desk scale; the exact LP
penalty remains the reference this mode is checked against.

The gradient-penalty derivative treats the activation mask as locally
constant, which is exact almost everywhere for piecewise-linear
activations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CriticSpec:
    in_dim: int
    hidden: int = 64
    leak: float = 0.2


@dataclass(frozen=True)
class CriticResult:
    loss: float
    grad: np.ndarray
    w1_estimate: float
    gp_term: float


def _layout(cspec: CriticSpec):
    h, d = cspec.hidden, cspec.in_dim
    sizes = [("w1", (h, d)), ("b1", (h,)), ("w2", (h,)), ("b2", (1,))]
    slices, off = {}, 0
    for name, shape in sizes:
        n = int(np.prod(shape))
        slices[name] = (slice(off, off + n), shape)
        off += n
    return slices, off


def critic_init(cspec: CriticSpec, seed: int) -> np.ndarray:
    slices, total = _layout(cspec)
    rng = np.random.default_rng(seed)
    params = np.zeros(total)
    sl, shape = slices["w1"]
    params[sl] = rng.uniform(-1, 1, size=sl.stop - sl.start) * np.sqrt(6.0 / cspec.in_dim)
    sl, shape = slices["w2"]
    params[sl] = rng.uniform(-1, 1, size=sl.stop - sl.start) * np.sqrt(6.0 / cspec.hidden)
    return params


def _unpack(params: np.ndarray, cspec: CriticSpec):
    slices, total = _layout(cspec)
    if len(params) != total:
        raise ValueError(f"critic parameter length {len(params)} != {total}")
    out = {}
    for name, (sl, shape) in slices.items():
        out[name] = params[sl].reshape(shape)
    return out


def critic_scores(params: np.ndarray, cspec: CriticSpec, x: np.ndarray) -> np.ndarray:
    """D(x) for a (B, in_dim) batch."""
    t = _unpack(params, cspec)
    z = x @ t["w1"].T + t["b1"]
    a = np.where(z > 0, z, cspec.leak * z)
    return a @ t["w2"] + t["b2"][0]


def critic_input_grad(params: np.ndarray, cspec: CriticSpec,
                      x: np.ndarray) -> np.ndarray:
    """Gradient of D with respect to each input row."""
    t = _unpack(params, cspec)
    z = x @ t["w1"].T + t["b1"]
    m = np.where(z > 0, 1.0, cspec.leak)
    return (m * t["w2"]) @ t["w1"]


def _score_param_grad(t, cspec, x, weight_per_sample):
    """Sum of weight_b * dD(x_b)/dtheta, flattened into layout order."""
    z = x @ t["w1"].T + t["b1"]
    a = np.where(z > 0, z, cspec.leak * z)
    m = np.where(z > 0, 1.0, cspec.leak)
    u = m * t["w2"]  # (B, h); dD/db1 per sample
    wu = weight_per_sample[:, None] * u
    gw1 = wu.T @ x
    gb1 = wu.sum(axis=0)
    gw2 = (weight_per_sample[:, None] * a).sum(axis=0)
    gb2 = np.array([weight_per_sample.sum()])
    return np.concatenate([gw1.ravel(), gb1, gw2, gb2])


def critic_loss_and_grads(critic_params: np.ndarray, cspec: CriticSpec,
                          fake: np.ndarray, real: np.ndarray, gp_weight: float,
                          rng: np.random.Generator) -> CriticResult:
    """One critic objective evaluation on flattened (B, in_dim) batches.

    loss = mean D(fake) - mean D(real)
           + gp_weight * mean (||grad_x D(x_mix)|| - 1)^2
    with x_mix uniform interpolates between paired real and fake rows.
    """
    t = _unpack(critic_params, cspec)
    b = fake.shape[0]
    d_fake = critic_scores(critic_params, cspec, fake)
    d_real = critic_scores(critic_params, cspec, real)

    eps = rng.uniform(size=(b, 1))
    mix = eps * real + (1.0 - eps) * fake
    z = mix @ t["w1"].T + t["b1"]
    m = np.where(z > 0, 1.0, cspec.leak)
    u = m * t["w2"]              # (B, h)
    g = u @ t["w1"]              # (B, in_dim) input gradients
    gnorm = np.linalg.norm(g, axis=1)
    gp = float(np.mean((gnorm - 1.0) ** 2))

    grad = (_score_param_grad(t, cspec, fake, np.full(b, 1.0 / b))
            - _score_param_grad(t, cspec, real, np.full(b, 1.0 / b)))

    # gradient-penalty derivative, activation mask held fixed
    safe = np.where(gnorm > 0, gnorm, 1.0)
    coef = 2.0 * (gnorm - 1.0) / safe * (gnorm > 0) / b  # (B,)
    ghat = coef[:, None] * g                             # (B, in_dim)
    gw1 = u.T @ ghat                                     # (h, in_dim)
    gw2 = m * (ghat @ t["w1"].T)                         # (B, h)
    gp_grad = np.concatenate([
        gw1.ravel(),
        np.zeros_like(t["b1"]),
        gw2.sum(axis=0),
        np.zeros(1),
    ])
    grad = grad + gp_weight * gp_grad

    loss = float(d_fake.mean() - d_real.mean()) + gp_weight * gp
    if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
        raise FloatingPointError(
            f"critic produced non-finite values (loss={loss!r})")
    return CriticResult(loss, grad, float(d_real.mean() - d_fake.mean()), gp)


def generator_penalty_grad(critic_params: np.ndarray, cspec: CriticSpec,
                           fake: np.ndarray) -> tuple[float, np.ndarray]:
    """Generator-side penalty -mean D(fake) and its gradient in the fake batch."""
    b = fake.shape[0]
    value = -float(critic_scores(critic_params, cspec, fake).mean())
    gz = -critic_input_grad(critic_params, cspec, fake) / b
    return value, gz
