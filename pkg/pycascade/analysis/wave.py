"""
Wave Analysis - Traveling-wave observables of the recurrence output
Front velocity fits, dispersion roots, centered profiles, tail fits and the
self-consistency residual of the wave equation.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.optimize import brentq

from pycascade.config import Config
from pycascade.core.errors import DomainError, FitError
from pycascade.core.grid import GridFunction, find_crossing, resample_shifted
from pycascade.core.recurrence import FrontTrace
from pycascade.models import DispersionSolution, TailFit, VelocityFit
from pycascade.utils.logger import get_logger

logger = get_logger(__name__)

MIN_FIT_POINTS = 10
# Below this, log-tails are rounding noise
NOISE_FLOOR = 1e-12
DOUBLE_ROOT_TOL = 1e-9

DEFAULT_TAIL_WINDOWS = {
    "ahead": (5.0, 15.0),
    "behind": (-5.0, -1.5),
}


def _lstsq(design: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    coeffs, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise FitError(f"Singular design matrix (rank {rank} < {design.shape[1]})")
    return coeffs, y - design @ coeffs


# Velocity


def fit_velocity(trace: FrontTrace, window: Optional[Tuple[int, int]] = None,
                 with_log: bool = True) -> VelocityFit:
    """Least squares x_f(n) ~ v n + b ln n + c0 (b omitted without the log term)"""
    if window is None:
        window = (max(1, int(trace.n[0])), int(trace.n[-1]))
    lo, hi = window
    if hi - lo + 1 < MIN_FIT_POINTS:
        raise FitError(f"Fit window {window} has fewer than {MIN_FIT_POINTS} fronts")
    if with_log and lo < 1:
        raise FitError("Log-corrected fit needs n >= 1")

    sub = trace.window(lo, hi)
    if len(sub) < MIN_FIT_POINTS:
        raise FitError(f"Only {len(sub)} fronts of the trace fall in window {window}")

    n = sub.n.astype(np.float64)
    columns = [n, np.log(n), np.ones_like(n)] if with_log else [n, np.ones_like(n)]
    coeffs, residual = _lstsq(np.column_stack(columns), sub.x_f)

    return VelocityFit(
        v=float(coeffs[0]),
        b=float(coeffs[1]) if with_log else None,
        c0=float(coeffs[-1]),
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
        window=(int(sub.n[0]), int(sub.n[-1])),
        with_log=with_log,
    )


def sliding_velocities(trace: FrontTrace, width: int, step: Optional[int] = None) -> List[VelocityFit]:
    """Linear-only velocity fits over consecutive windows of fixed width"""
    if width < MIN_FIT_POINTS:
        raise FitError(f"Window width must be >= {MIN_FIT_POINTS}")
    step = width if step is None else step
    if step < 1:
        raise ValueError("step must be >= 1")

    first, last = int(trace.n[0]), int(trace.n[-1])
    return [
        fit_velocity(trace, (lo, lo + width - 1), with_log=False)
        for lo in range(first, last - width + 2, step)
    ]


def effective_velocity(trace: FrontTrace, n: int) -> float:
    """Last front increment x_f(n) - x_f(n-1)"""
    idx = np.searchsorted(trace.n, n)
    if idx < 1 or idx >= len(trace) or trace.n[idx] != n or trace.n[idx - 1] != n - 1:
        raise DomainError(f"Trace lacks fronts n={n - 1} and n={n}")
    return float(trace.x_f[idx] - trace.x_f[idx - 1])


# Dispersion relation a * exp(-a v) = 1


def decay_velocity(a: float) -> float:
    """v(a) = ln(a)/a, the dispersion relation solved for v"""
    if a <= 0:
        raise ValueError(f"Decay rate must be positive, got {a}")
    return math.log(a) / a


def dispersion_roots(v: float) -> DispersionSolution:
    """Positive a with a*exp(-a v) = 1, solved in the log form ln a - a v = 0.

    The left side peaks at a = 1/v with value 1/(v e): below 1 there is no
    root, at 1 a double root, above 1 one root on each side of the peak.
    """
    if v <= 0:
        raise ValueError(f"Velocity must be positive, got {v}")
    peak_at = 1.0 / v
    peak = peak_at / math.e

    if abs(peak - 1.0) <= DOUBLE_ROOT_TOL:
        return DispersionSolution(v=v, roots=[peak_at])
    if peak < 1.0:
        return DispersionSolution(v=v, roots=[])

    def g(a: float) -> float:
        return math.log(a) - a * v

    lower = peak_at
    while g(lower) >= 0:
        lower *= 0.5
    upper = peak_at
    while g(upper) >= 0:
        upper *= 2.0

    a_minus = brentq(g, lower, peak_at, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    a_plus = brentq(g, peak_at, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return DispersionSolution(v=v, roots=[float(a_minus), float(a_plus)])


def selected_velocity() -> Tuple[float, float]:
    """Maximum of v(a) = ln(a)/a, from the root of (1 - ln a)/a^2"""
    a = brentq(lambda a: (1.0 - math.log(a)) / (a * a), 1.0, 10.0,
               xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return decay_velocity(a), float(a)


# Profiles


@dataclass
class WaveProfile:
    """Pi(xi) = P_n(xi + x_f(n)) on a window containing xi = 0 as a grid point.

    L and R are trapezoid integrals over the window only; the tail bounds
    estimate what lies outside it, from 1 - Pi ~ e^{e xi} behind and
    Pi ~ e^{-xi} ahead.
    """

    pi: GridFunction
    front: float
    n: Optional[int] = None
    L: float = 0.0
    R: float = 0.0
    L_tail_bound: float = 0.0
    R_tail_bound: float = 0.0

    @property
    def xi(self) -> np.ndarray:
        return self.pi.x

    @property
    def values(self) -> np.ndarray:
        return self.pi.values

    @property
    def window(self) -> Tuple[float, float]:
        return self.pi.spec.origin, self.pi.spec.end

    @property
    def zero_index(self) -> int:
        return int(round(-self.pi.spec.origin / self.pi.spec.h))

    @classmethod
    def from_grid(cls, pi: GridFunction, front: float, n: Optional[int] = None) -> "WaveProfile":
        profile = cls(pi=pi, front=front, n=n)
        k = profile.zero_index
        v = pi.values
        profile.L = float(trapezoid(1.0 - v[:k + 1], dx=pi.spec.h))
        profile.R = float(trapezoid(v[k:], dx=pi.spec.h))
        profile.L_tail_bound = float((1.0 - v[0]) / math.e)
        profile.R_tail_bound = float(v[-1])
        return profile

    def summary(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "front": self.front,
            "window": list(self.window),
            "L": self.L,
            "R": self.R,
            "L_tail_bound": self.L_tail_bound,
            "R_tail_bound": self.R_tail_bound,
        }

    def to_csv(self, path: Union[str, Path]) -> Path:
        return self.pi.to_csv(path, header=("xi", "pi"))


def extract_profile(p_n: GridFunction, level: float = None, span: float = None,
                    margin: float = None, n: Optional[int] = None) -> WaveProfile:
    """Center p_n at its level crossing and resample on [-span, span] (clipped to the domain)"""
    level = Config.FRONT_LEVEL if level is None else level
    span = Config.PROFILE_SPAN if span is None else span
    margin = Config.PROFILE_MARGIN if margin is None else margin

    front = find_crossing(p_n, level)
    behind = front - p_n.spec.origin
    ahead = p_n.spec.end - front
    if behind < margin or ahead < margin:
        raise DomainError(
            f"Front at {front:.4f} leaves {behind:.2f} behind and {ahead:.2f} ahead; "
            f"need {margin} on each side"
        )

    h = p_n.spec.h
    k_behind = int(math.floor(min(span, behind) / h))
    k_ahead = int(math.floor(min(span, ahead) / h))
    shifted = resample_shifted(p_n, front, (-k_behind * h, k_ahead * h))
    # exact at the crossing, not just to interpolation rounding
    values = shifted.values.copy()
    values[k_behind] = level
    return WaveProfile.from_grid(shifted.with_values(values), front, n)


def profile_distance(a: WaveProfile, b: WaveProfile, window: Tuple[float, float]) -> float:
    """sup |Pi_a - Pi_b| over the grid points of a inside window"""
    lo, hi = window
    for p in (a, b):
        if lo < p.window[0] or hi > p.window[1]:
            raise DomainError(f"Window {window} outside profile window {p.window}")
    xi = a.xi[(a.xi >= lo) & (a.xi <= hi)]
    return float(np.max(np.abs(a.pi(xi) - b.pi(xi))))


def tail_fit(profile: WaveProfile, side: str, window: Optional[Tuple[float, float]] = None,
             floor: float = NOISE_FLOOR) -> TailFit:
    """Fit ln Pi (ahead) or ln(1 - Pi) (behind) linearly in xi"""
    if side not in DEFAULT_TAIL_WINDOWS:
        raise ValueError(f"side must be 'ahead' or 'behind', got {side!r}")
    lo, hi = DEFAULT_TAIL_WINDOWS[side] if window is None else window

    xi = profile.xi
    tail = profile.values if side == "ahead" else 1.0 - profile.values
    in_window = (xi >= lo) & (xi <= hi)
    usable = in_window & (tail > floor)
    dropped = int(np.count_nonzero(in_window & ~usable))
    if dropped:
        logger.warning(f"{side} tail fit: {dropped} point(s) in [{lo}, {hi}] below noise floor {floor}")
    if np.count_nonzero(usable) < 2:
        raise FitError(f"No usable {side} tail values in window [{lo}, {hi}]")

    x = xi[usable]
    y = np.log(tail[usable])
    coeffs, residual = _lstsq(np.column_stack([x, np.ones_like(x)]), y)
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - float(np.sum(residual ** 2)) / total if total > 0 else 1.0

    return TailFit(
        side=side,
        slope=float(coeffs[0]),
        intercept=float(coeffs[1]),
        window=(float(x[0]), float(x[-1])),
        r_squared=r_squared,
        points=int(x.size),
    )


def ahead_intercept_prediction(profile: WaveProfile, v: float) -> float:
    """ln Pi(xi) ~ -xi + R - L - v far ahead of the front"""
    return profile.R - profile.L - v


def wave_equation_residual(profile: WaveProfile, v: float,
                           window: Tuple[float, float] = (-10.0, 10.0)) -> float:
    """sup over window of |Pi(xi - v) - exp(-xi - L + int_0^xi Pi)|"""
    lo, hi = window
    p_lo, p_hi = profile.window
    if lo - v < p_lo or hi > p_hi:
        raise DomainError(
            f"Residual window {window} with v={v} needs profile support on "
            f"[{lo - v}, {hi}], have [{p_lo}, {p_hi}]"
        )

    xi = profile.xi
    k = profile.zero_index
    cumulative = cumulative_trapezoid(profile.values, dx=profile.pi.spec.h, initial=0.0)
    inner = cumulative - cumulative[k]

    mask = (xi >= lo) & (xi <= hi)
    lhs = profile.pi(xi[mask] - v)
    rhs = np.exp(-xi[mask] - profile.L + inner[mask])
    return float(np.max(np.abs(lhs - rhs)))


def tail_summary(profile: WaveProfile, v: float) -> Dict[str, Any]:
    """Both tail fits and the ahead-amplitude comparison"""
    ahead = tail_fit(profile, "ahead")
    behind = tail_fit(profile, "behind")
    return {
        "ahead": ahead.model_dump(),
        "behind": behind.model_dump(),
        "ahead_intercept_predicted": ahead_intercept_prediction(profile, v),
    }

