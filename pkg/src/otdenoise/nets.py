"""Miniature encoder-decoder denoiser with hand-rolled reverse mode.

A network is a flat tuple of layer descriptors (:class:`Conv`,
:class:`ConvTranspose`, :class:`Relu`, :class:`SkipAdd`) evaluated
sequentially; ``SkipAdd`` adds the output of an earlier layer (index -1
is the network input).  Parameters live in one flat float64 vector with
a slice table mapping into per-layer tensors, which keeps optimizers
and checkpoints trivial.

The default architecture downsamples twice with stride-2 convolutions,
upsamples twice with their transposes, and closes with a stride-1
convolution plus an input skip.  The final convolution initializes to
zero so the freshly initialized network is exactly the identity map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from otdenoise._kernels import conv2d_bwd_input, conv2d_bwd_weights, conv2d_fwd

MIN_RECEPTIVE_FIELD = 5


@dataclass(frozen=True)
class Conv:
    kernel: int
    in_ch: int
    out_ch: int
    stride: int = 1


@dataclass(frozen=True)
class ConvTranspose:
    """Upsampling adjoint of a stride-``stride`` convolution.

    Maps (B, in_ch, H, W) to (B, out_ch, H*stride, W*stride); the weight
    tensor has shape (in_ch, out_ch, k, k).
    """

    kernel: int
    in_ch: int
    out_ch: int
    stride: int


@dataclass(frozen=True)
class Relu:
    pass


@dataclass(frozen=True)
class SkipAdd:
    from_layer: int  # activation index; -1 is the network input


def default_net_spec(c1: int = 8, c2: int = 16) -> tuple:
    """Residual U-Net in miniature.

    Two stride-2 downsampling convolutions, their transposes back up,
    skip additions joining matching scales, and a residual connection
    from the input to the output.  The encoder-decoder skips matter:
    without them the bottleneck cannot carry pixel-level detail and the
    network cannot express a per-pixel noise correction.
    """
    return (
        Conv(3, 1, c1, stride=1),         # 0: full-res features
        Relu(),                           # 1
        Conv(3, c1, c1, stride=2),        # 2: half res
        Relu(),                           # 3
        Conv(3, c1, c2, stride=2),        # 4: quarter res
        Relu(),                           # 5
        ConvTranspose(3, c2, c1, stride=2),   # 6: half res
        SkipAdd(3),                       # 7
        Relu(),                           # 8
        ConvTranspose(3, c1, c1, stride=2),   # 9: full res
        SkipAdd(1),                       # 10
        Relu(),                           # 11
        Conv(3, c1, 1, stride=1),         # 12
        SkipAdd(-1),                      # 13: residual identity path
    )


def shape_chain(spec: tuple, in_shape: tuple) -> list:
    """Per-layer output shapes (C, H, W) for a given input shape.

    Raises on any channel mismatch, on a skip whose operands disagree,
    and when the final output shape differs from the input shape.
    """
    shapes = []
    cur = tuple(in_shape)
    for idx, layer in enumerate(spec):
        c, h, w = cur
        if isinstance(layer, Conv):
            if layer.in_ch != c:
                raise ValueError(f"layer {idx}: expects {layer.in_ch} channels, got {c}")
            p = layer.kernel // 2
            ho = (h + 2 * p - layer.kernel) // layer.stride + 1
            wo = (w + 2 * p - layer.kernel) // layer.stride + 1
            cur = (layer.out_ch, ho, wo)
        elif isinstance(layer, ConvTranspose):
            if layer.in_ch != c:
                raise ValueError(f"layer {idx}: expects {layer.in_ch} channels, got {c}")
            cur = (layer.out_ch, h * layer.stride, w * layer.stride)
        elif isinstance(layer, SkipAdd):
            ref = in_shape if layer.from_layer == -1 else shapes[layer.from_layer]
            if tuple(ref) != cur:
                raise ValueError(f"layer {idx}: skip shape {ref} != {cur}")
        shapes.append(cur)
    if tuple(shapes[-1]) != tuple(in_shape):
        raise ValueError(f"output shape {shapes[-1]} != input shape {in_shape}")
    return shapes


def receptive_field(spec: tuple) -> int:
    rf, jump = 1.0, 1.0
    for layer in spec:
        if isinstance(layer, Conv):
            rf += (layer.kernel - 1) * jump
            jump *= layer.stride
        elif isinstance(layer, ConvTranspose):
            jump /= layer.stride
            rf += (layer.kernel - 1) * jump
    return int(np.ceil(rf))


def validate_net(spec: tuple, in_shape: tuple) -> list:
    shapes = shape_chain(spec, in_shape)
    rf = receptive_field(spec)
    if rf < MIN_RECEPTIVE_FIELD:
        raise ValueError(f"receptive field {rf} < {MIN_RECEPTIVE_FIELD}")
    return shapes


def param_layout(spec: tuple) -> tuple[list, int]:
    """Slice table: (layer index, tensor name, shape, slice) per tensor."""
    entries = []
    offset = 0
    for idx, layer in enumerate(spec):
        if isinstance(layer, Conv):
            wshape = (layer.out_ch, layer.in_ch, layer.kernel, layer.kernel)
            bshape = (layer.out_ch,)
        elif isinstance(layer, ConvTranspose):
            wshape = (layer.in_ch, layer.out_ch, layer.kernel, layer.kernel)
            bshape = (layer.out_ch,)
        else:
            continue
        for name, shape in (("w", wshape), ("b", bshape)):
            size = int(np.prod(shape))
            entries.append((idx, name, shape, slice(offset, offset + size)))
            offset += size
    return entries, offset


def init_params(spec: tuple, seed: int) -> np.ndarray:
    """He-uniform weights, zero biases, and a zeroed final conv layer."""
    rng = np.random.default_rng(seed)
    entries, total = param_layout(spec)
    params = np.zeros(total)
    last_idx = max(e[0] for e in entries)
    for idx, name, shape, sl in entries:
        if name != "w" or idx == last_idx:
            continue
        layer = spec[idx]
        fan_in = layer.in_ch * layer.kernel ** 2
        lim = np.sqrt(6.0 / fan_in)
        params[sl] = rng.uniform(-lim, lim, size=sl.stop - sl.start)
    return params


def _tensors(params: np.ndarray, spec: tuple) -> dict:
    entries, total = param_layout(spec)
    if len(params) != total:
        raise ValueError(f"parameter vector length {len(params)} != {total}")
    return {(idx, name): params[sl].reshape(shape)
            for idx, name, shape, sl in entries}


def forward(params: np.ndarray, spec: tuple, x: np.ndarray) -> tuple[np.ndarray, list]:
    """Run the network on a batch (B, C, H, W); returns output and activations."""
    tensors = _tensors(params, spec)
    acts = []
    cur = x
    for idx, layer in enumerate(spec):
        if isinstance(layer, Conv):
            w, b = tensors[(idx, "w")], tensors[(idx, "b")]
            cur = conv2d_fwd(cur, w, layer.stride) + b[None, :, None, None]
        elif isinstance(layer, ConvTranspose):
            w, b = tensors[(idx, "w")], tensors[(idx, "b")]
            h, wd = cur.shape[2] * layer.stride, cur.shape[3] * layer.stride
            cur = conv2d_bwd_input(cur, w, layer.stride, h, wd) + b[None, :, None, None]
        elif isinstance(layer, Relu):
            cur = np.maximum(cur, 0.0)
        elif isinstance(layer, SkipAdd):
            ref = x if layer.from_layer == -1 else acts[layer.from_layer]
            cur = cur + ref
        else:
            raise TypeError(f"unknown layer {layer!r}")
        acts.append(cur)
    return cur, acts


def backward(params: np.ndarray, spec: tuple, x: np.ndarray, acts: list,
             gy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reverse-mode pass; returns input gradient and flat parameter gradient."""
    tensors = _tensors(params, spec)
    entries, total = param_layout(spec)
    gparams = np.zeros(total)
    slices = {(idx, name): sl for idx, name, _, sl in entries}
    grads = [None] * len(spec)
    grads[-1] = gy
    gx_input = np.zeros_like(x)

    def layer_input(idx):
        return x if idx == 0 else acts[idx - 1]

    for idx in range(len(spec) - 1, -1, -1):
        g = grads[idx]
        if g is None:
            continue
        layer = spec[idx]
        if isinstance(layer, Conv):
            w = tensors[(idx, "w")]
            inp = layer_input(idx)
            gin = conv2d_bwd_input(g, w, layer.stride, inp.shape[2], inp.shape[3])
            gparams[slices[(idx, "w")]] += conv2d_bwd_weights(
                inp, g, layer.stride, layer.kernel).ravel()
            gparams[slices[(idx, "b")]] += g.sum(axis=(0, 2, 3))
        elif isinstance(layer, ConvTranspose):
            w = tensors[(idx, "w")]
            inp = layer_input(idx)
            gin = conv2d_fwd(g, w, layer.stride)
            gparams[slices[(idx, "w")]] += conv2d_bwd_weights(
                g, inp, layer.stride, layer.kernel).ravel()
            gparams[slices[(idx, "b")]] += g.sum(axis=(0, 2, 3))
        elif isinstance(layer, Relu):
            gin = g * (layer_input(idx) > 0)
        elif isinstance(layer, SkipAdd):
            gin = g
            if layer.from_layer == -1:
                gx_input += g
            else:
                src = layer.from_layer
                grads[src] = g if grads[src] is None else grads[src] + g
        if idx == 0:
            gx_input += gin
        else:
            grads[idx - 1] = gin if grads[idx - 1] is None else grads[idx - 1] + gin
    return gx_input, gparams


def net_to_dicts(spec: tuple) -> list:
    out = []
    for layer in spec:
        d = {"type": type(layer).__name__}
        d.update(vars(layer))
        out.append(d)
    return out


def net_from_dicts(dicts: list) -> tuple:
    types = {"Conv": Conv, "ConvTranspose": ConvTranspose,
             "Relu": Relu, "SkipAdd": SkipAdd}
    layers = []
    for d in dicts:
        d = dict(d)
        cls = types[d.pop("type")]
        layers.append(cls(**d))
    return tuple(layers)


def net_to_json(spec: tuple) -> str:
    return json.dumps(net_to_dicts(spec))


def net_from_json(text: str) -> tuple:
    return net_from_dicts(json.loads(text))


def batch_from_patches(patches) -> np.ndarray:
    return np.stack([np.asarray(p)[None, :, :] for p in patches])


def denoise_patches(params: np.ndarray, spec: tuple, patches,
                    clip: bool = True) -> list:
    """Apply the network patch-wise; clips to [0, 1] for metric images."""
    y, _ = forward(params, spec, batch_from_patches(patches))
    out = [y[i, 0] for i in range(y.shape[0])]
    if clip:
        out = [np.clip(o, 0.0, 1.0) for o in out]
    return out
