"""Periodic grids, sampled fields and the SLTNFLD1 snapshot format."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

MAGIC = b"SLTNFLD1"


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    Lx: float
    Ly: float

    def __post_init__(self):
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if not _is_pow2(n) or n < 16:
                raise ValueError(f"{name} must be a power of two >= 16, got {n}")
        if not (self.Lx > 0 and self.Ly > 0):
            raise ValueError("box lengths must be positive")

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.Ly / self.ny

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def x(self) -> np.ndarray:
        return -self.Lx / 2 + self.dx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return -self.Ly / 2 + self.dy * np.arange(self.ny)

    def mesh(self):
        """``(X, Y)`` arrays of shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y)

    def kx(self) -> np.ndarray:
        """Wavenumbers for the last (rfft) axis."""
        return 2 * math.pi * np.fft.rfftfreq(self.nx, d=self.dx)

    def ky(self) -> np.ndarray:
        return 2 * math.pi * np.fft.fftfreq(self.ny, d=self.dy)

    def kgrid(self):
        """``(KX, KY)`` broadcastable to the rfft2 shape ``(ny, nx//2+1)``."""
        return self.kx()[None, :], self.ky()[:, None]

    def scaled(self, fx: float, fy: float) -> "GridSpec":
        return GridSpec(self.nx, self.ny, self.Lx * fx, self.Ly * fy)

    def to_json(self) -> dict:
        return {"nx": self.nx, "ny": self.ny, "Lx": self.Lx, "Ly": self.Ly}


@dataclass
class Field2D:
    grid: GridSpec
    data: np.ndarray
    time: float = 0.0
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.shape != self.grid.shape:
            raise ValueError(f"data shape {self.data.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field contains non-finite values")

    def copy(self) -> "Field2D":
        return Field2D(self.grid, self.data.copy(), self.time, dict(self.meta))


def write_field(path: str, f: Field2D, model: Dict[str, Any] = None) -> None:
    """Magic, one-line JSON header ending in newline, little-endian float64 samples."""
    header = dict(f.grid.to_json())
    header["time"] = f.time
    m = dict(model or {})
    for key in ("model", "p", "sigma2", "gb_sign"):
        header[key] = m.get(key, f.meta.get(key))
    extra = {k: v for k, v in f.meta.items() if k not in header}
    if extra:
        header["meta"] = extra
    text = json.dumps(header, sort_keys=True, separators=(",", ":"), default=str)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(text.encode("utf-8") + b"\n")
        fh.write(f.data.astype("<f8", copy=False).tobytes(order="C"))
    os.replace(tmp, path)


def read_field(path: str) -> Field2D:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != MAGIC:
        raise ValueError(f"{path}: not a SLTNFLD1 file")
    nl = raw.index(b"\n", 8)
    header = json.loads(raw[8:nl].decode("utf-8"))
    grid = GridSpec(int(header["nx"]), int(header["ny"]), float(header["Lx"]), float(header["Ly"]))
    body = raw[nl + 1:]
    n = grid.nx * grid.ny
    if len(body) != 8 * n:
        raise ValueError(f"{path}: expected {8 * n} data bytes, found {len(body)}")
    data = np.frombuffer(body, dtype="<f8").reshape(grid.shape).astype(np.float64)
    meta = {k: header[k] for k in ("model", "p", "sigma2", "gb_sign") if header.get(k) is not None}
    meta.update(header.get("meta", {}))
    return Field2D(grid, data, float(header["time"]), meta)
