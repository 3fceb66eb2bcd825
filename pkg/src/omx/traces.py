"""Sampled measurement curves and their CSV form.

CSV layout::

    # meta: {"kind": "reflection", "x_unit": "Hz", ...}
    x,y_re[,y_im]
    1.93e14,0.998
    ...

Floats are written with 17 significant digits so a write/read cycle is exact.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

__all__ = ["Trace", "TRACE_KINDS", "read_trace_csv", "write_trace_csv", "atomic_write_text"]

TRACE_KINDS = ("reflection", "phase", "s_param", "psd", "linewidth", "efficiency", "scan")


@dataclass(frozen=True)
class Trace:
    x: np.ndarray
    y: np.ndarray
    kind: str = "reflection"
    x_unit: str = "Hz"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        y = np.array(self.y)
        y = y.astype(complex) if np.iscomplexobj(y) else y.astype(float)
        if x.ndim != 1 or y.shape != x.shape:
            raise ValueError(f"x and y must be 1-d of equal length, got {x.shape} and {y.shape}")
        if len(x) < 2:
            raise ValueError("a trace needs at least two samples")
        if np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing")
        if self.kind not in TRACE_KINDS:
            raise ValueError(f"unknown trace kind {self.kind!r}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return len(self.x)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.y)

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return (self.kind == other.kind and self.x_unit == other.x_unit and self.meta == other.meta
                and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))

    __hash__ = None


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trace_to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    header = {"kind": trace.kind, "x_unit": trace.x_unit, **trace.meta}
    buf.write("# meta: " + json.dumps(header, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    if trace.is_complex:
        w.writerow(["x", "y_re", "y_im"])
        for xi, yi in zip(trace.x, trace.y):
            w.writerow([f"{xi:.17g}", f"{yi.real:.17g}", f"{yi.imag:.17g}"])
    else:
        w.writerow(["x", "y_re"])
        for xi, yi in zip(trace.x, trace.y):
            w.writerow([f"{xi:.17g}", f"{yi:.17g}"])
    return buf.getvalue()


def write_trace_csv(trace: Trace, path) -> None:
    atomic_write_text(path, trace_to_csv(trace))


def read_trace_csv(path) -> Trace:
    text = Path(path).read_text()
    meta = {}
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.startswith("# meta:"):
            try:
                meta = json.loads(line[len("# meta:"):])
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}:{lineno}: bad meta header: {exc}") from None
        elif line.startswith("#") or not line.strip():
            continue
        else:
            rows.append((lineno, line))
    if not rows:
        raise ConfigError(f"{path}: no data")
    header = [c.strip() for c in rows[0][1].split(",")]
    if header not in (["x", "y_re"], ["x", "y_re", "y_im"]):
        raise ConfigError(f"{path}:{rows[0][0]}: expected header x,y_re[,y_im], got {header}")
    data = []
    for lineno, line in rows[1:]:
        parts = line.split(",")
        if len(parts) != len(header):
            raise ConfigError(f"{path}:{lineno}: expected {len(header)} columns")
        try:
            data.append([float(p) for p in parts])
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric value") from None
    arr = np.array(data, dtype=float)
    y = arr[:, 1] + 1j * arr[:, 2] if len(header) == 3 else arr[:, 1]
    kind = meta.pop("kind", "reflection")
    x_unit = meta.pop("x_unit", "Hz")
    try:
        return Trace(arr[:, 0], y, kind=kind, x_unit=x_unit, meta=meta)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
