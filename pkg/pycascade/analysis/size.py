"""
Size Statistics - Exact size moments, Monte Carlo moments, scaled size distribution
"""

import math
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import List, Union

import numpy as np

from pycascade.config import Config
from pycascade.core.errors import UnsupportedOrderError
from pycascade.models import EXACT_MOMENT_ORDERS, ScaledSizeReport, SizeMomentReport
from pycascade.simulation.tree import size_sample
from pycascade.utils.logger import get_logger
from pycascade.utils.serializer import write_csv

logger = get_logger(__name__)

MAX_MC_ORDER = 5


def exact_moment(x: float, p: int) -> float:
    """<S^p(x)> for p in {1, 2, 3}.

    S(x) is geometric on {1, 2, ...} with parameter exp(-x), which gives
    e^x, 2e^{2x} - e^x and 6e^{3x} - 6e^{2x} + e^x.
    """
    if p not in EXACT_MOMENT_ORDERS:
        raise UnsupportedOrderError(f"No closed form for moment order p={p}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    e = math.exp(x)
    if p == 1:
        return e
    if p == 2:
        return 2.0 * e * e - e
    return 6.0 * e ** 3 - 6.0 * e * e + e


def finite_x_scaled_moment(x: float, p: int) -> float:
    """e^{-px} <S^p(x)>, the finite-x value of M_p (p <= 3)"""
    if p == 0:
        return 1.0
    return math.exp(-p * x) * exact_moment(x, p)


@lru_cache(maxsize=None)
def limiting_moment(p: int) -> Fraction:
    """M_p of the scaled limit from (1 - 1/p) M_p = sum_k C(p-1, k-1) M_k M_{p-k} / k"""
    if p < 0:
        raise ValueError("p must be >= 0")
    if p <= 1:
        return Fraction(1)
    total = sum(
        (Fraction(math.comb(p - 1, k - 1)) * limiting_moment(k) * limiting_moment(p - k) / k
         for k in range(1, p)),
        Fraction(0),
    )
    return total / (1 - Fraction(1, p))


def moments_from_sizes(sizes: np.ndarray, x: float, p_max: int = 3) -> List[SizeMomentReport]:
    """Sample moments of S with plain standard errors"""
    s = np.asarray(sizes, dtype=np.float64)
    n = s.size
    reports = []
    for p in range(1, p_max + 1):
        values = s ** p
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        reports.append(SizeMomentReport(
            x=x,
            p=p,
            exact=exact_moment(x, p) if p in EXACT_MOMENT_ORDERS else None,
            estimate=float(values.mean()),
            std_error=se,
            replicates=n,
        ))
    return reports


def mc_moments(x: float, replicates: int, master_seed: int, p_max: int = 3,
               **kwargs) -> List[SizeMomentReport]:
    """Sizes of `replicates` sampled trees reduced to moments p = 1..p_max"""
    if replicates < 100:
        raise ValueError(f"mc_moments needs >= 100 replicates, got {replicates}")
    if not 1 <= p_max <= MAX_MC_ORDER:
        raise ValueError(f"p_max must be in 1..{MAX_MC_ORDER}, got {p_max}")
    sizes = size_sample(x, replicates, master_seed, **kwargs)
    return moments_from_sizes(sizes, x, p_max)


def jackknife_std_error(values: np.ndarray, block_size: int = None) -> float:
    """Leave-one-block-out standard error of the mean of values"""
    block_size = Config.BLOCK_SIZE if block_size is None else block_size
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    starts = np.arange(0, n, block_size)
    if starts.size < 2:
        return float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0

    block_sums = np.add.reduceat(values, starts)
    block_counts = np.diff(np.append(starts, n))
    leave_out = (values.sum() - block_sums) / (n - block_counts)
    g = starts.size
    return float(math.sqrt((g - 1) / g * np.sum((leave_out - leave_out.mean()) ** 2)))


def scaled_report(sizes: np.ndarray, x: float, bins: int = 200, sigma_max: float = 10.0,
                  p_max: int = MAX_MC_ORDER, block_size: int = None) -> ScaledSizeReport:
    sigma = math.exp(-x) * np.asarray(sizes, dtype=np.float64)
    counts, edges = np.histogram(sigma, bins=bins, range=(0.0, sigma_max))
    overflow = int(np.count_nonzero(sigma > sigma_max))

    moments = [1.0]
    std_errors = [0.0]
    for p in range(1, p_max + 1):
        values = sigma ** p
        moments.append(float(values.mean()))
        std_errors.append(jackknife_std_error(values, block_size))

    return ScaledSizeReport(
        x=x,
        replicates=int(sigma.size),
        bin_edges=edges.tolist(),
        counts=counts.tolist(),
        overflow=overflow,
        moments=moments,
        std_errors=std_errors,
        limits=[float(limiting_moment(p)) for p in range(p_max + 1)],
        finite_x=[finite_x_scaled_moment(x, p) if p <= 3 else None for p in range(p_max + 1)],
    )


def scaled_distribution(x: float, replicates: int, master_seed: int, bins: int = 200,
                        sigma_max: float = 10.0, p_max: int = MAX_MC_ORDER,
                        **kwargs) -> ScaledSizeReport:
    """Histogram and moments of sigma = e^{-x} S"""
    if x < 4:
        raise ValueError(f"Scaled distribution needs x >= 4, got {x}")
    if replicates < 100:
        raise ValueError(f"scaled_distribution needs >= 100 replicates, got {replicates}")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if sigma_max <= 0:
        raise ValueError("sigma_max must be positive")
    sizes = size_sample(x, replicates, master_seed, **kwargs)
    report = scaled_report(sizes, x, bins, sigma_max, p_max, kwargs.get("block_size"))
    logger.info(
        f"Scaled sizes at x={x}: M_1={report.moments[1]:.4f}, M_2={report.moments[2]:.4f} "
        f"({report.overflow} above sigma_max)"
    )
    return report


def write_histogram_csv(report: ScaledSizeReport, path: Union[str, Path]) -> Path:
    """Bins as (sigma_lo, sigma_hi, count); the overflow bin has sigma_hi = inf"""
    edges = report.bin_edges
    rows = [(edges[i], edges[i + 1], c) for i, c in enumerate(report.counts)]
    rows.append((edges[-1], "inf", report.overflow))
    return write_csv(path, ("sigma_lo", "sigma_hi", "count"), rows)
