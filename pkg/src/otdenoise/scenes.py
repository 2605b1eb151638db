"""Procedural clean images, patch extraction, and unpaired domain assembly.

Scene kinds: ``piecewise_constant_shapes`` drops axis-aligned rectangles
and discs on a flat background (depth-like statistics),
``smooth_gradient`` is a random linear ramp, ``sinusoid_texture`` sums a
few oriented sinusoids.  All pixel values land in [0, 1].

Domains for training are unpaired by construction: the clean-target
domain and the noisy-source domain come from disjoint scene seed sets.
The clean originals underlying the noisy domain are kept alongside for
metric computation only.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from otdenoise.noise import NoiseSpec, apply_noise, derive_seed

SCENE_KINDS = ("piecewise_constant_shapes", "smooth_gradient", "sinusoid_texture")

# offset separating clean-domain scene seeds from noisy-domain ones
_NOISY_DOMAIN_OFFSET = 1 << 32


@dataclass(frozen=True)
class SceneSpec:
    """Procedural scene parameters.

    ``intensity_levels > 0`` draws region intensities from an evenly
    spaced palette of that many levels instead of the continuum, giving
    the few-level statistics of rendered depth images; 0 keeps
    intensities continuous.
    """

    kind: str = "piecewise_constant_shapes"
    size: int = 32
    min_shapes: int = 2
    max_shapes: int = 6
    min_intensity: float = 0.1
    max_intensity: float = 0.9
    intensity_levels: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SCENE_KINDS:
            raise ValueError(f"unknown scene kind {self.kind!r}")
        if not (0.0 <= self.min_intensity <= self.max_intensity <= 1.0):
            raise ValueError("intensity range must satisfy 0 <= lo <= hi <= 1")
        if self.min_shapes < 0 or self.max_shapes < self.min_shapes:
            raise ValueError("shape count range invalid")
        if self.size < 1:
            raise ValueError("size must be positive")
        if self.intensity_levels < 0:
            raise ValueError("intensity_levels must be >= 0")


def generate_scene(spec: SceneSpec) -> np.ndarray:
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.min_intensity, spec.max_intensity

    def draw_level():
        if spec.intensity_levels > 0:
            if spec.intensity_levels == 1:
                return lo
            i = rng.integers(0, spec.intensity_levels)
            return lo + (hi - lo) * i / (spec.intensity_levels - 1)
        return rng.uniform(lo, hi)

    size = spec.size
    if spec.kind == "piecewise_constant_shapes":
        img = np.full((size, size), draw_level())
        yy, xx = np.mgrid[0:size, 0:size]
        n_shapes = int(rng.integers(spec.min_shapes, spec.max_shapes + 1))
        for _ in range(n_shapes):
            level = draw_level()
            if rng.random() < 0.5:
                h = int(rng.integers(max(2, size // 8), max(3, size // 2)))
                w = int(rng.integers(max(2, size // 8), max(3, size // 2)))
                r = int(rng.integers(0, size - h + 1))
                c = int(rng.integers(0, size - w + 1))
                img[r:r + h, c:c + w] = level
            else:
                rad = rng.uniform(size / 10, size / 4)
                cy, cx = rng.uniform(0, size, size=2)
                img[(yy - cy) ** 2 + (xx - cx) ** 2 <= rad ** 2] = level
        return img
    if spec.kind == "smooth_gradient":
        theta = rng.uniform(0, 2 * np.pi)
        yy, xx = np.mgrid[0:size, 0:size] / max(size - 1, 1)
        ramp = np.cos(theta) * xx + np.sin(theta) * yy
        ramp = (ramp - ramp.min()) / max(ramp.max() - ramp.min(), 1e-12)
        return lo + (hi - lo) * ramp
    # sinusoid_texture
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = np.zeros((size, size))
    for _ in range(int(rng.integers(2, 5))):
        freq = rng.uniform(0.5, 3.0) * 2 * np.pi / size
        theta = rng.uniform(0, np.pi)
        phase = rng.uniform(0, 2 * np.pi)
        img += rng.uniform(0.3, 1.0) * np.sin(
            freq * (np.cos(theta) * xx + np.sin(theta) * yy) + phase)
    img = (img - img.min()) / max(img.max() - img.min(), 1e-12)
    return lo + (hi - lo) * img


def extract_patches(image: np.ndarray, patch_size: int, stride: int | None = None,
                    limit: int | None = None, seed: int = 0) -> list[np.ndarray]:
    """Grid patches when ``stride`` is given, else seeded uniform sampling.

    Random sampling requires ``limit``; grid extraction is row-major and
    truncated to ``limit`` when one is given.
    """
    h, w = image.shape
    if patch_size > h or patch_size > w:
        raise ValueError(f"patch size {patch_size} exceeds image {image.shape}")
    patches = []
    if stride is not None:
        for r in range(0, h - patch_size + 1, stride):
            for c in range(0, w - patch_size + 1, stride):
                patches.append(image[r:r + patch_size, c:c + patch_size].copy())
                if limit is not None and len(patches) >= limit:
                    return patches
        return patches
    if limit is None:
        raise ValueError("random sampling requires a limit")
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, h - patch_size + 1, size=limit)
    cols = rng.integers(0, w - patch_size + 1, size=limit)
    return [image[r:r + patch_size, c:c + patch_size].copy()
            for r, c in zip(rows, cols)]


@dataclass(frozen=True)
class DomainPair:
    """Clean-target and noisy-source patch sets.

    When ``paired`` is false there is no index correspondence between
    the two lists and their scene seed sets are disjoint.
    ``clean_of_noisy`` holds the originals behind the noisy patches for
    metric computation only; ``noisy_alt`` is a second independent
    degradation of the same originals, present when requested.
    """

    clean_patches: list = field(repr=False)
    noisy_patches: list = field(repr=False)
    paired: bool
    clean_scene_seeds: tuple
    noisy_scene_seeds: tuple
    clean_of_noisy: list = field(repr=False, default=None)
    noisy_alt: list = field(repr=False, default=None)
    noise_spec: NoiseSpec | None = None

    def __post_init__(self):
        if not self.paired:
            overlap = set(self.clean_scene_seeds) & set(self.noisy_scene_seeds)
            if overlap:
                raise ValueError(f"unpaired domains share scene seeds: {overlap}")


def _patches_from_scenes(scene: SceneSpec, seeds, patch_size: int,
                         per_scene: int) -> list[np.ndarray]:
    out = []
    for s in seeds:
        img = generate_scene(replace(scene, seed=s))
        out.extend(extract_patches(img, patch_size, stride=None,
                                   limit=per_scene, seed=s))
    return out


def build_domains(scene: SceneSpec, noise: NoiseSpec, paired: bool,
                  n_patches: int, patch_size: int, seed: int,
                  patches_per_scene: int = 8,
                  with_second_noisy: bool = False) -> DomainPair:
    """Assemble clean-target and noisy-source domains of ``n_patches`` each.

    Scene seeds derive from ``seed``; the noisy domain uses an offset
    seed range so unpaired domains can never share a scene.  Noise seeds
    derive per patch index, so a second realization (for noisy-pair
    training) differs from the first but shares the clean original.
    """
    n_scenes = -(-n_patches // patches_per_scene)
    clean_seeds = tuple(derive_seed(seed, i) for i in range(n_scenes))
    if paired:
        noisy_seeds = clean_seeds
        clean = _patches_from_scenes(scene, clean_seeds, patch_size,
                                     patches_per_scene)[:n_patches]
        originals = clean
    else:
        noisy_seeds = tuple(derive_seed(seed, _NOISY_DOMAIN_OFFSET + i)
                            for i in range(n_scenes))
        clean = _patches_from_scenes(scene, clean_seeds, patch_size,
                                     patches_per_scene)[:n_patches]
        originals = _patches_from_scenes(scene, noisy_seeds, patch_size,
                                         patches_per_scene)[:n_patches]
    noisy = [apply_noise(p, noise, i) for i, p in enumerate(originals)]
    noisy_alt = None
    if with_second_noisy:
        noisy_alt = [apply_noise(p, noise, _NOISY_DOMAIN_OFFSET + i)
                     for i, p in enumerate(originals)]
    return DomainPair(clean, noisy, paired, clean_seeds, noisy_seeds,
                      clean_of_noisy=originals, noisy_alt=noisy_alt,
                      noise_spec=noise)
