"""
Grid - Uniform-grid functions with cumulative quadrature and level crossings
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from pycascade.core.errors import DomainError, NoCrossingError
from pycascade.utils.serializer import write_csv

# Values below this are flushed to zero
UNDERFLOW = 1e-300

# Absorbs x_max/h rounding (0.1/1e-4 = 999.9999999999999)
_COUNT_EPS = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid origin, origin+h, ..., covering [origin, origin + x_max]"""

    x_max: float
    h: float
    origin: float = 0.0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"Grid spacing must be positive, got h={self.h}")
        if self.x_max < 0:
            raise ValueError(f"Domain endpoint must be non-negative, got x_max={self.x_max}")
        if self.count < 2:
            raise ValueError(f"Grid needs at least 2 points (x_max={self.x_max}, h={self.h})")

    @property
    def count(self) -> int:
        return int(math.floor(self.x_max / self.h + _COUNT_EPS)) + 1

    @property
    def end(self) -> float:
        """Coordinate of the last grid point"""
        return self.origin + (self.count - 1) * self.h

    @property
    def points(self) -> np.ndarray:
        return self.origin + np.arange(self.count) * self.h


class GridFunction:
    """Real values on a GridSpec; immutable after construction"""

    def __init__(self, spec: GridSpec, values):
        values = np.array(values, dtype=np.float64)
        if values.ndim != 1 or values.size != spec.count:
            raise ValueError(
                f"Expected {spec.count} values for grid, got shape {values.shape}"
            )
        values[np.abs(values) < UNDERFLOW] = 0.0
        values.setflags(write=False)
        self.spec = spec
        self.values = values

    @property
    def x(self) -> np.ndarray:
        return self.spec.points

    def __call__(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Linear interpolation; outside the grid is a DomainError"""
        arr = np.asarray(x, dtype=np.float64)
        tol = 1e-9 * self.spec.h
        if np.any(arr < self.spec.origin - tol) or np.any(arr > self.spec.end + tol):
            raise DomainError(
                f"Evaluation outside [{self.spec.origin}, {self.spec.end}]"
            )
        result = np.interp(arr, self.x, self.values)
        return float(result) if np.ndim(result) == 0 else result

    def __len__(self) -> int:
        return self.values.size

    def is_probability(self, tol: float = 1e-12) -> bool:
        """Values in [0,1], first value 1, non-increasing"""
        v = self.values
        return bool(
            np.all(v >= -tol) and np.all(v <= 1.0 + tol)
            and abs(v[0] - 1.0) <= tol
            and np.all(np.diff(v) <= tol)
        )

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.spec, values)

    def to_rows(self):
        return zip(self.x.tolist(), self.values.tolist())

    def to_csv(self, path: Union[str, Path], header: Tuple[str, str] = ("x", "value")) -> Path:
        return write_csv(path, header, self.to_rows())


def cumulative_integral(f: GridFunction) -> GridFunction:
    """C(x_i) = trapezoid prefix sum of f from the grid origin, C(origin) = 0"""
    return f.with_values(cumulative_trapezoid(f.values, dx=f.spec.h, initial=0.0))


def find_crossing(f: GridFunction, level: float) -> float:
    """x where the piecewise-linear interpolant of non-increasing f equals level"""
    v = f.values
    if not v[0] > level > v[-1]:
        raise NoCrossingError(
            f"Level {level} outside range ({v[-1]}, {v[0]}) of grid function"
        )
    # first grid point at or below the level; v[0] > level so idx >= 1
    idx = int(np.argmax(v <= level))
    f0, f1 = v[idx - 1], v[idx]
    x0 = f.spec.origin + (idx - 1) * f.spec.h
    return float(x0 + (f0 - level) / (f0 - f1) * f.spec.h)


def resample_shifted(f: GridFunction, shift: float, window: Tuple[float, float],
                     h: float = None) -> GridFunction:
    """Values of f(xi + shift) for xi on a fresh grid over window"""
    lo, hi = window
    if hi <= lo:
        raise DomainError(f"Empty window {window}")
    h = f.spec.h if h is None else h
    tol = 1e-9 * f.spec.h
    if lo + shift < f.spec.origin - tol or hi + shift > f.spec.end + tol:
        raise DomainError(
            f"Window {window} shifted by {shift} leaves domain "
            f"[{f.spec.origin}, {f.spec.end}]"
        )
    spec = GridSpec(x_max=hi - lo, h=h, origin=lo)
    return GridFunction(spec, np.interp(spec.points + shift, f.x, f.values))
