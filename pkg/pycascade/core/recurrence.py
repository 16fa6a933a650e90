"""
Recurrence - Height distribution of the cascade tree
Iterates P_n(x) = exp[-x + int_0^x P_{n-1}(y) dy] from P_0(x) = exp(-x).
"""

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Optional, Union

import numpy as np

from pycascade.config import Config
from pycascade.core.errors import (
    DomainError, GridBudgetError, InvariantViolation, NotConvergedError,
)
from pycascade.core.grid import GridFunction, GridSpec, cumulative_integral, find_crossing
from pycascade.utils.logger import get_logger
from pycascade.utils.serializer import read_msgpack, write_csv, write_msgpack

logger = get_logger(__name__)

# Rounding slack for the monotonicity checks
_MONOTONE_TOL = 1e-13


def seed_p0(spec: GridSpec) -> GridFunction:
    """P_0(x) = exp(-x): the root is terminal"""
    return GridFunction(spec, np.exp(-spec.points))


def step(p_prev: GridFunction) -> GridFunction:
    """One application of the recurrence.

    The exponent is integrated as int_0^x (P - 1) dy, which equals -x + int_0^x P
    and is a prefix sum of non-positive terms whenever P <= 1, so the output is
    exactly 1 at the origin, never above 1, and non-increasing.
    """
    exponent = cumulative_integral(p_prev.with_values(p_prev.values - 1.0))
    return p_prev.with_values(np.exp(np.minimum(exponent.values, 0.0)))


def closed_form_p1(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """P_1(x) = exp[-x + 1 - exp(-x)]"""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("closed_form_p1 requires x >= 0")
    # -expm1(-x) = 1 - exp(-x) without cancellation near 0
    value = np.exp(-x - np.expm1(-x))
    return float(value) if value.ndim == 0 else value


@dataclass
class FrontTrace:
    """Front positions x_f(n) for consecutive n"""

    n: np.ndarray
    x_f: np.ndarray

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=np.int64)
        self.x_f = np.asarray(self.x_f, dtype=np.float64)
        if self.n.shape != self.x_f.shape:
            raise ValueError("FrontTrace needs one position per n")
        if self.x_f.size > 1 and not np.all(np.diff(self.x_f) > 0):
            raise InvariantViolation("Front positions must be strictly increasing in n")

    def __len__(self) -> int:
        return self.n.size

    def window(self, lo: int, hi: int) -> "FrontTrace":
        mask = (self.n >= lo) & (self.n <= hi)
        return FrontTrace(self.n[mask], self.x_f[mask])

    def to_rows(self):
        return zip(self.n.tolist(), self.x_f.tolist())

    def to_csv(self, path: Union[str, Path]) -> Path:
        return write_csv(path, ("n", "x_front"), self.to_rows())


@dataclass
class RecurrenceRun:
    """Output of run(): fronts for every n, selected profiles, exceedance sums"""

    spec: GridSpec
    n_max: int
    level: float
    fronts: np.ndarray
    profiles: Dict[int, GridFunction] = field(default_factory=dict)
    # sum_{n <= n_max} (1 - P_n(x)) on the grid
    exceedance: Optional[GridFunction] = None
    last: Optional[GridFunction] = None

    def front_trace(self) -> FrontTrace:
        return FrontTrace(np.arange(self.n_max + 1), self.fronts)

    def profile(self, n: int) -> GridFunction:
        if n not in self.profiles:
            raise KeyError(f"Profile for n={n} was not stored (stored: {sorted(self.profiles)})")
        return self.profiles[n]

    def save(self, path: Union[str, Path]) -> Path:
        """msgpack checkpoint"""
        payload = {
            "x_max": self.spec.x_max,
            "h": self.spec.h,
            "n_max": self.n_max,
            "level": self.level,
            "fronts": self.fronts.tolist(),
            "profiles": {str(n): p.values.tolist() for n, p in self.profiles.items()},
            "exceedance": self.exceedance.values.tolist(),
            "last": self.last.values.tolist(),
        }
        return write_msgpack(path, payload)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RecurrenceRun":
        payload = read_msgpack(path)
        spec = GridSpec(x_max=payload["x_max"], h=payload["h"])
        return cls(
            spec=spec,
            n_max=int(payload["n_max"]),
            level=float(payload["level"]),
            fronts=np.asarray(payload["fronts"], dtype=np.float64),
            profiles={int(n): GridFunction(spec, v) for n, v in payload["profiles"].items()},
            exceedance=GridFunction(spec, payload["exceedance"]),
            last=GridFunction(spec, payload["last"]),
        )


def domain_for(n_max: int, margin: float = None) -> float:
    """Front position n_max/e plus the tail margin"""
    margin = Config.DOMAIN_MARGIN if margin is None else margin
    return n_max / math.e + margin


def run(n_max: int, store: Iterable[int] = (), h: float = None, level: float = None,
        margin: float = None, max_points: int = None) -> RecurrenceRun:
    """Iterate the recurrence n_max times on [0, n_max/e + margin]"""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    h = Config.GRID_STEP if h is None else h
    level = Config.FRONT_LEVEL if level is None else level
    max_points = Config.MAX_GRID_POINTS if max_points is None else max_points
    store = set(int(n) for n in store)
    bad = [n for n in store if not 0 <= n <= n_max]
    if bad:
        raise ValueError(f"Cannot store profiles outside 0..{n_max}: {sorted(bad)}")

    x_max = domain_for(n_max, margin)
    points = int(math.floor(x_max / h)) + 1
    if points > max_points:
        raise GridBudgetError(
            f"Grid of {points} points exceeds budget {max_points} (x_max={x_max:.3f}, h={h})"
        )
    spec = GridSpec(x_max=x_max, h=h)
    logger.info(f"Recurrence run: n_max={n_max}, h={h}, x_max={x_max:.3f}, points={spec.count}")
    started = time.perf_counter()

    current = seed_p0(spec)
    fronts = np.empty(n_max + 1)
    fronts[0] = find_crossing(current, level)
    exceedance = 1.0 - current.values
    profiles: Dict[int, GridFunction] = {}
    if 0 in store:
        profiles[0] = current

    for n in range(1, n_max + 1):
        nxt = step(current)
        if np.any(nxt.values < current.values - _MONOTONE_TOL):
            worst = float(np.max(current.values - nxt.values))
            raise InvariantViolation(f"P_{n} < P_{n - 1} somewhere on the grid (by {worst:.3e})")
        fronts[n] = find_crossing(nxt, level)
        if fronts[n] <= fronts[n - 1]:
            raise InvariantViolation(f"Front did not advance at n={n}")
        exceedance += 1.0 - nxt.values
        if n in store:
            profiles[n] = nxt
        current = nxt
        if n % 50 == 0:
            logger.debug(f"  n={n}: x_f={fronts[n]:.6f}")

    logger.info(
        f"Recurrence done in {time.perf_counter() - started:.2f}s: "
        f"x_f({n_max})={fronts[n_max]:.6f}"
    )
    return RecurrenceRun(
        spec=spec,
        n_max=n_max,
        level=level,
        fronts=fronts,
        profiles=profiles,
        exceedance=GridFunction(spec, exceedance),
        last=current,
    )


def mean_height(x: float, run: RecurrenceRun, tol: float = None) -> float:
    """E[H(x)] = sum_n (1 - P_n(x)), the tail-sum identity for the height"""
    tol = Config.TAIL_TOLERANCE if tol is None else tol
    if x < 0 or x > run.spec.x_max:
        raise DomainError(f"x={x} outside recurrence domain [0, {run.spec.x_max:.3f}]")
    residual = 1.0 - run.last(x)
    if residual >= tol:
        raise NotConvergedError(
            f"1 - P_{run.n_max}({x}) = {residual:.3e} >= {tol:.1e}; increase n_max",
            residual=residual,
        )
    return float(run.exceedance(x))


def mean_height_asymptote(x: float) -> float:
    """Leading terms e*x - 1.5*ln(x) of the mean height"""
    if x <= 0:
        raise ValueError("Asymptote defined for x > 0")
    return math.e * x - 1.5 * math.log(x)


def n_max_for_heights(x_max: float, margin: float = 15.0) -> int:
    """An n_max whose final profile is within tolerance of 1 up to x_max"""
    return int(math.ceil(math.e * (x_max + margin))) + 10
