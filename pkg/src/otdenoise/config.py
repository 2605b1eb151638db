"""Flat key-value experiment configuration with a typed schema.

The on-disk format is one ``key = value`` pair per line; ``#`` starts a
comment.  Unknown keys, type errors and malformed lines are reported
with the offending field and line number.  ``TrainConfig`` carries the
full experiment description and builds the typed specs the modules
consume.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from otdenoise.errors import ConfigError
from otdenoise.losses import LossSpec
from otdenoise.nets import default_net_spec
from otdenoise.noise import NoiseSpec
from otdenoise.scenes import SceneSpec


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class TrainConfig:
    # scene
    scene_kind: str = "piecewise_constant_shapes"
    image_size: int = 32
    min_shapes: int = 2
    max_shapes: int = 6
    min_intensity: float = 0.1
    max_intensity: float = 0.9
    intensity_levels: int = 5
    # noise
    noise_kind: str = "gaussian"
    sigma: float = 25.0 / 255.0
    lambda_p: float = 30.0
    kernel_size: int = 5
    kernel_sigma: float = 1.0
    clip: bool = False
    # data
    patch_size: int = 8
    n_train: int = 384
    n_val: int = 64
    patches_per_scene: int = 8
    # network
    channels1: int = 8
    channels2: int = 16
    # objective
    lam: float = 2.0
    beta: float = 1.0
    penalty_mode: str = "exact_minibatch_w1"
    gp_weight: float = 10.0
    critic_steps: int = 5
    critic_hidden: int = 64
    # optimization
    epochs: int = 200
    batch_size: int = 16
    lr: float = 1e-3
    critic_lr: float = 5e-4
    rho: float = 0.9
    decay_epoch: int = 100
    decay_factor: float = 0.1
    # bookkeeping
    seed: int = 0
    out_dir: str = "runs"
    methods: str = "ot,n2c,n2n,dist_only,identity,gaussian_filter,median_filter"

    def scene_spec(self, seed: int | None = None) -> SceneSpec:
        return SceneSpec(self.scene_kind, self.image_size, self.min_shapes,
                         self.max_shapes, self.min_intensity, self.max_intensity,
                         self.intensity_levels,
                         seed=self.seed if seed is None else seed)

    def noise_spec(self) -> NoiseSpec:
        return NoiseSpec(self.noise_kind, self.sigma, self.lambda_p,
                         self.kernel_size, self.kernel_sigma, self.clip,
                         seed=self.seed)

    def net_spec(self) -> tuple:
        return default_net_spec(self.channels1, self.channels2)

    def loss_spec(self, lam: float | None = None) -> LossSpec:
        return LossSpec(lam=self.lam if lam is None else lam, beta=self.beta,
                        penalty_mode=self.penalty_mode, gp_weight=self.gp_weight,
                        critic_steps=self.critic_steps,
                        critic_hidden=self.critic_hidden)

    def method_list(self) -> list:
        return [m.strip() for m in self.methods.split(",") if m.strip()]

    def with_overrides(self, **kw) -> "TrainConfig":
        return replace(self, **kw)


_FIELD_TYPES = {f.name: f.type for f in fields(TrainConfig)}


def parse_config_text(text: str) -> TrainConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown field {key!r}")
        ftype = _FIELD_TYPES[key]
        try:
            if ftype in ("int", int):
                values[key] = int(val)
            elif ftype in ("float", float):
                values[key] = float(val)
            elif ftype in ("bool", bool):
                values[key] = _parse_bool(val)
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: field {key!r}: {exc}") from exc
    try:
        return TrainConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path) -> TrainConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def config_to_text(cfg: TrainConfig) -> str:
    lines = [f"{f.name} = {getattr(cfg, f.name)}" for f in fields(TrainConfig)]
    return "\n".join(lines) + "\n"


def save_config(cfg: TrainConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_to_text(cfg))
