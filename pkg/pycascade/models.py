"""
Pydantic models for reports and CLI run configurations
"""

import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from pycascade.config import Config

EXACT_MOMENT_ORDERS = (1, 2, 3)


class VelocityFit(BaseModel):
    """Least-squares fit of x_f(n) against {n, ln n, 1}"""
    v: float
    b: Optional[float] = Field(None, description="Coefficient of ln n (None without the log term)")
    c0: float
    residual_rms: float = Field(..., ge=0)
    window: Tuple[int, int]
    with_log: bool = True


class DispersionSolution(BaseModel):
    """Positive roots a of a*exp(-a*v) = 1"""
    v: float = Field(..., gt=0)
    roots: List[float] = Field(default_factory=list)

    @property
    def double_root(self) -> bool:
        return len(self.roots) == 1


class TailFit(BaseModel):
    """Linear fit of a log-tail of the wave profile"""
    side: Literal["ahead", "behind"]
    slope: float
    intercept: float
    window: Tuple[float, float]
    r_squared: float
    points: int = Field(..., ge=2)


class SizeMomentReport(BaseModel):
    """Monte Carlo estimate of <S^p(x)> with its standard error"""
    x: float = Field(..., ge=0)
    p: int = Field(..., ge=1)
    exact: Optional[float] = None
    estimate: float
    std_error: float = Field(..., ge=0)
    replicates: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _exact_iff_closed_form(self):
        if (self.exact is not None) != (self.p in EXACT_MOMENT_ORDERS):
            raise ValueError(f"exact value must be present iff p in {EXACT_MOMENT_ORDERS}")
        return self

    @property
    def z_score(self) -> Optional[float]:
        if self.exact is None or self.std_error == 0:
            return None
        return (self.estimate - self.exact) / self.std_error


class ScaledSizeReport(BaseModel):
    """Histogram and moments of sigma = exp(-x) * S"""
    x: float
    replicates: int = Field(..., ge=1)
    bin_edges: List[float]
    counts: List[int]
    overflow: int = Field(..., ge=0)
    moments: List[float] = Field(..., description="M_0..M_p_max")
    std_errors: List[float]
    limits: List[float] = Field(..., description="Moments of the scaled limit")
    finite_x: List[Optional[float]] = Field(
        default_factory=list, description="Exact e^{-px}<S^p(x)> where known"
    )

    @property
    def variance(self) -> float:
        return self.moments[2] - self.moments[1] ** 2

    @model_validator(mode="after")
    def _mass_conserved(self):
        if sum(self.counts) + self.overflow != self.replicates:
            raise ValueError("Histogram mass must equal the replicate count")
        if len(self.bin_edges) != len(self.counts) + 1:
            raise ValueError("Need one more bin edge than bins")
        return self


# CLI run configurations


class RunConfig(BaseModel):
    """Options shared by every subcommand"""
    model_config = ConfigDict(extra="forbid")

    output_dir: str = Field(default_factory=lambda: Config.OUTPUT_DIR)
    format: Literal["csv", "json"] = "csv"


class RecurConfig(RunConfig):
    n_max: int = Field(..., ge=1)
    store: List[int] = Field(default_factory=list)
    h: float = Field(default_factory=lambda: Config.GRID_STEP, gt=0, le=0.1)
    level: float = Field(default_factory=lambda: Config.FRONT_LEVEL, gt=0, lt=1)
    heights: List[float] = Field(default_factory=list)
    checkpoint: Optional[str] = None

    @model_validator(mode="after")
    def _store_in_range(self):
        bad = [n for n in self.store if not 0 <= n <= self.n_max]
        if bad:
            raise ValueError(f"--store values outside 0..{self.n_max}: {bad}")
        if any(x < 0 for x in self.heights):
            raise ValueError("--heights must be non-negative")
        return self


class WaveConfig(RunConfig):
    n_max: int = Field(300, ge=20)
    h: float = Field(default_factory=lambda: Config.GRID_STEP, gt=0, le=0.1)
    window: Optional[Tuple[int, int]] = None
    profile_n: Optional[int] = Field(None, ge=1)
    v: Optional[float] = Field(None, gt=0)
    from_run: Optional[str] = None

    @model_validator(mode="after")
    def _window_valid(self):
        # a checkpoint brings its own n_max; the window is checked against it on load
        if self.window is None and self.from_run is None:
            self.window = (max(1, self.n_max // 10), self.n_max)
        if self.window is not None:
            lo, hi = self.window
            if lo < 1 or hi - lo + 1 < 10 or (self.from_run is None and hi > self.n_max):
                raise ValueError(
                    f"--window {lo},{hi} must satisfy 1 <= lo, hi <= n_max={self.n_max}, "
                    "and cover at least 10 fronts"
                )
        if self.from_run is None and self.profile_n is not None and self.profile_n > self.n_max:
            raise ValueError("--profile-n must not exceed --n-max")
        profile_n = self.profile_n if self.profile_n is not None else (None if self.from_run else self.n_max)
        min_n = math.ceil(math.e * Config.PROFILE_MARGIN)
        if profile_n is not None and profile_n < min_n:
            raise ValueError(
                f"profile index {profile_n} puts the front within {Config.PROFILE_MARGIN} of x=0; "
                f"use --n-max or --profile-n >= {min_n}"
            )
        return self


class MonteCarloConfig(RunConfig):
    seed: int = Field(..., ge=0, lt=2 ** 64)
    replicates: int = Field(..., ge=1)
    threads: int = Field(default_factory=lambda: Config.THREADS, ge=1)


class TreeConfig(MonteCarloConfig):
    x: float = Field(..., ge=0)
    node_cap: int = Field(default_factory=lambda: Config.NODE_CAP, ge=1)
    samples: bool = True


class DiscreteConfig(MonteCarloConfig):
    m: int = Field(..., ge=1)
    c: float = Field(..., ge=0, le=1)


class SizeConfig(MonteCarloConfig):
    x: float = Field(..., ge=0)
    replicates: int = Field(..., ge=100)
    node_cap: int = Field(default_factory=lambda: Config.NODE_CAP, ge=1)
    p_max: int = Field(3, ge=1, le=5)
    scaled: bool = False
    bins: int = Field(200, ge=1)
    sigma_max: float = Field(10.0, gt=0)

    @model_validator(mode="after")
    def _scaled_needs_large_x(self):
        if self.scaled and self.x < 4:
            raise ValueError(f"--scaled needs --x >= 4, got {self.x}")
        return self


class SeriesConfig(RunConfig):
    n: int = Field(..., ge=0)
    order: Optional[int] = None

    @model_validator(mode="after")
    def _order_valid(self):
        if self.order is None:
            self.order = self.n + 6
        if self.order < 1:
            raise ValueError("--order must be >= 1")
        return self
