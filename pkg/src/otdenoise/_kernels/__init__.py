"""Convolution kernel backend selection.

Prefers the compiled extension and falls back to the NumPy
implementation when it is not built.  Set OTDENOISE_KERNELS=numpy (or
=cython) to force a backend; forcing cython raises if the extension is
missing instead of silently degrading.
"""

import os

_requested = os.environ.get("OTDENOISE_KERNELS", "").strip().lower()
if _requested not in ("", "cython", "numpy"):
    raise ImportError(
        f"OTDENOISE_KERNELS must be 'cython' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    from otdenoise._kernels import _convnp as _impl
    BACKEND = "numpy"
else:
    try:
        from otdenoise._kernels import _convcy as _impl
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from otdenoise._kernels import _convnp as _impl
        BACKEND = "numpy"

conv2d_fwd = _impl.conv2d_fwd
conv2d_bwd_input = _impl.conv2d_bwd_input
conv2d_bwd_weights = _impl.conv2d_bwd_weights

__all__ = ["conv2d_fwd", "conv2d_bwd_input", "conv2d_bwd_weights", "BACKEND"]
