"""Binary PGM (P5) read/write with 8-bit or 16-bit samples.

Pixels map linearly between [0, 1] floats and [0, maxval] integers;
16-bit samples are big-endian as the format requires.  Header comments
(``#`` to end of line) are accepted anywhere whitespace is.
"""

from __future__ import annotations

import numpy as np


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ValueError("malformed PGM header: unexpected end of file")
    return buf[start:pos], pos


def load_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, pos = _read_token(buf, 0)
    if magic != b"P5":
        raise ValueError(f"unsupported PGM magic {magic!r}, expected P5")
    fields = []
    for _ in range(3):
        tok, pos = _read_token(buf, pos)
        if not tok.isdigit():
            raise ValueError(f"malformed PGM header token {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval not in (255, 65535):
        raise ValueError(f"unsupported maxval {maxval}, expected 255 or 65535")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval == 65535 else np.dtype("u1")
    need = width * height * dtype.itemsize
    payload = buf[pos:pos + need]
    if len(payload) < need:
        raise ValueError(
            f"truncated PGM payload: need {need} bytes, have {len(payload)}")
    data = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return data.astype(np.float64) / maxval


def save_pgm(patch: np.ndarray, path, maxval: int = 255) -> None:
    if maxval not in (255, 65535):
        raise ValueError(f"unsupported maxval {maxval}, expected 255 or 65535")
    patch = np.asarray(patch, dtype=np.float64)
    if patch.ndim != 2:
        raise ValueError(f"expected a 2-D patch, got shape {patch.shape}")
    q = np.rint(np.clip(patch, 0.0, 1.0) * maxval)
    dtype = np.dtype(">u2") if maxval == 65535 else np.dtype("u1")
    h, w = patch.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(q.astype(dtype).tobytes())
