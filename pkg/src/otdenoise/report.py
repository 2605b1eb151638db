"""Run artifacts: metric CSV, JSON report, and binary checkpoints.

The CSV is fully determined by (config, seed): it contains no clocks or
paths, so identical runs produce byte-identical files.  Infinite PSNR
(identical images) is written as the string ``inf``.  Wall-clock and
environment details live in the JSON report instead.

Checkpoint layout: magic ``OTDN``, u32 version, u32 length + JSON
network descriptor, u64 count + little-endian float64 parameters.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from otdenoise.metrics import MetricsReport
from otdenoise.nets import net_from_json, net_to_json

CSV_COLUMNS = ("method", "noise_kind", "sigma", "lambda", "psnr_db", "ssim",
               "w1_to_clean", "fidelity_to_noisy", "seed")

_MAGIC = b"OTDN"
_VERSION = 1


@dataclass
class RunReport:
    config_text: str
    rows: list = field(default_factory=list)       # CSV rows, dicts
    curves: dict = field(default_factory=dict)     # method -> list of epoch dicts
    verdicts: list = field(default_factory=list)   # theorem verification rows
    noise_audit: dict | None = None
    wall_clock_s: float = 0.0

    def add_method(self, method: str, noise_kind: str, sigma: float, lam: float,
                   metrics: MetricsReport, seed: int) -> None:
        self.rows.append({
            "method": method,
            "noise_kind": noise_kind,
            "sigma": sigma,
            "lambda": lam,
            "psnr_db": metrics.psnr_db,
            "ssim": metrics.ssim,
            "w1_to_clean": metrics.w1_to_clean,
            "fidelity_to_noisy": metrics.fidelity_to_noisy,
            "seed": seed,
        })


def _fmt(value) -> str:
    if isinstance(value, float):
        if np.isposinf(value):
            return "inf"
        return format(value, ".12g")
    return str(value)


def rows_to_csv(rows: list) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def write_csv(report: RunReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(report.rows))


def write_json(report: RunReport, path) -> None:
    payload = {
        "config": report.config_text,
        "rows": report.rows,
        "curves": report.curves,
        "verdicts": report.verdicts,
        "noise_audit": report.noise_audit,
        "wall_clock_s": report.wall_clock_s,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, frozenset):
        return sorted(obj)
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def save_checkpoint(path, spec: tuple, params: np.ndarray) -> None:
    desc = net_to_json(spec).encode("utf-8")
    vec = np.ascontiguousarray(params, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<I", len(desc)))
        fh.write(desc)
        fh.write(struct.pack("<Q", vec.size))
        fh.write(vec.tobytes())


def load_checkpoint(path) -> tuple[tuple, np.ndarray]:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != _MAGIC:
        raise ValueError(f"bad checkpoint magic {buf[:4]!r}")
    version, = struct.unpack_from("<I", buf, 4)
    if version != _VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    dlen, = struct.unpack_from("<I", buf, 8)
    desc = buf[12:12 + dlen].decode("utf-8")
    count, = struct.unpack_from("<Q", buf, 12 + dlen)
    offset = 12 + dlen + 8
    expected = offset + 8 * count
    if len(buf) < expected:
        raise ValueError(f"truncated checkpoint: need {expected} bytes, have {len(buf)}")
    params = np.frombuffer(buf[offset:expected], dtype="<f8").copy()
    return net_from_json(desc), params
