"""
Tree Sampler - Monte Carlo continuum cascade trees
A vertex at y has Poisson(x - y) children placed uniformly on (y, x].
"""

import functools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from pycascade.config import Config
from pycascade.core.errors import CensoredSampleError, NodeBudgetExceeded
from pycascade.simulation.executor import BlockExecutor
from pycascade.simulation.streams import SeedStream
from pycascade.utils.logger import get_logger
from pycascade.utils.serializer import write_csv

logger = get_logger(__name__)

TREE_HEADER = ("replicate", "size", "height", "terminals")
HEIGHT_CDF_HEADER = ("n", "cdf", "std_error")


@dataclass(frozen=True)
class TreeStats:
    """Summary of one sampled cascade tree"""

    size: int
    height: int
    terminal_count: int

    def __post_init__(self):
        if self.size < 1 or self.terminal_count < 1 or self.terminal_count > self.size:
            raise ValueError(f"Inconsistent tree statistics: {self}")
        if not 0 <= self.height <= self.size - 1 or (self.height == 0) != (self.size == 1):
            raise ValueError(f"Inconsistent tree height: {self}")


def sample_tree(x: float, seeds: SeedStream, node_cap: int = None,
                batch_size: int = None) -> TreeStats:
    """Grow one tree generation-batch by generation-batch on an explicit stack.

    Stack entries are (positions, depth) arrays of at most batch_size vertices,
    so memory stays O(depth * batch_size) and no topology is kept.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    node_cap = Config.NODE_CAP if node_cap is None else node_cap
    batch_size = Config.BATCH_SIZE if batch_size is None else batch_size
    if node_cap < 1:
        raise ValueError(f"node_cap must be >= 1, got {node_cap}")

    rng = seeds.generator()
    stack: List[Tuple[np.ndarray, int]] = [(np.zeros(1), 0)]
    size = height = terminals = 0

    while stack:
        positions, depth = stack.pop()
        size += positions.size
        if size > node_cap:
            raise NodeBudgetExceeded(
                f"Tree exceeded node_cap={node_cap} at x={x} "
                f"(replicate {seeds.replicate_index})",
                replicate=seeds.replicate_index,
            )
        height = max(height, depth)

        remaining = x - positions
        counts = rng.poisson(remaining)
        terminals += int(np.count_nonzero(counts == 0))
        total = int(counts.sum())
        if total == 0:
            continue

        # 1 - U lies in (0, 1], placing children on (y, x]
        spans = np.repeat(remaining, counts)
        children = np.repeat(positions, counts) + (1.0 - rng.random(total)) * spans
        for start in range(0, total, batch_size):
            stack.append((children[start:start + batch_size], depth + 1))

    return TreeStats(size=size, height=height, terminal_count=terminals)


def _sample_block(x: float, master_seed: int, node_cap: int, batch_size: int,
                  start: int, stop: int) -> Tuple[np.ndarray, List[int]]:
    """Rows (size, height, terminals) for replicates start..stop-1"""
    rows = np.zeros((stop - start, 3), dtype=np.int64)
    censored: List[int] = []
    for offset, index in enumerate(range(start, stop)):
        try:
            stats = sample_tree(x, SeedStream(master_seed, index), node_cap, batch_size)
        except NodeBudgetExceeded:
            censored.append(index)
            continue
        rows[offset] = (stats.size, stats.height, stats.terminal_count)
    return rows, censored


@dataclass
class HeightCDF:
    """Empirical Prob(H <= n) with binomial standard errors"""

    x: float
    replicates: int
    n: np.ndarray
    cdf: np.ndarray
    std_error: np.ndarray

    def to_rows(self):
        return zip(self.n.tolist(), self.cdf.tolist(), self.std_error.tolist())

    def as_dict(self) -> Dict[int, Tuple[float, float]]:
        return {int(n): (float(p), float(s)) for n, p, s in zip(self.n, self.cdf, self.std_error)}

    def to_csv(self, path: Union[str, Path]) -> Path:
        return write_csv(path, HEIGHT_CDF_HEADER, self.to_rows())


@dataclass
class TreeEnsemble:
    """Per-replicate statistics of independently sampled trees"""

    x: float
    master_seed: int
    node_cap: int
    sizes: np.ndarray
    heights: np.ndarray
    terminals: np.ndarray

    @property
    def replicates(self) -> int:
        return int(self.sizes.size)

    def height_cdf(self) -> HeightCDF:
        n = np.arange(int(self.heights.max()) + 1)
        counts = np.bincount(self.heights, minlength=n.size)
        cdf = np.cumsum(counts) / self.replicates
        std_error = np.sqrt(cdf * (1.0 - cdf) / self.replicates)
        return HeightCDF(self.x, self.replicates, n, cdf, std_error)

    def height_moments(self) -> Dict[str, float]:
        """Mean and variance of the height as a sampled quantity"""
        h = self.heights.astype(np.float64)
        var = float(h.var(ddof=1)) if h.size > 1 else 0.0
        return {
            "mean": float(h.mean()),
            "variance": var,
            "std_error": math.sqrt(var / h.size),
        }

    def summary(self) -> Dict[str, float]:
        s = self.sizes.astype(np.float64)
        t = self.terminals.astype(np.float64)
        n = self.replicates
        return {
            "x": self.x,
            "replicates": n,
            "mean_size": float(s.mean()),
            "mean_size_std_error": float(s.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
            "mean_height": self.height_moments()["mean"],
            "height_variance": self.height_moments()["variance"],
            "mean_terminals": float(t.mean()),
            "single_vertex_fraction": float(np.mean(self.sizes == 1)),
        }

    def to_rows(self):
        return zip(range(self.replicates), self.sizes.tolist(),
                   self.heights.tolist(), self.terminals.tolist())

    def to_csv(self, path: Union[str, Path]) -> Path:
        return write_csv(path, TREE_HEADER, self.to_rows())


def simulate_trees(x: float, replicates: int, master_seed: int, node_cap: int = None,
                   workers: int = None, block_size: int = None,
                   batch_size: int = None) -> TreeEnsemble:
    """Sample replicates trees; replicate i always uses substream (master_seed, i)"""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    node_cap = Config.NODE_CAP if node_cap is None else node_cap
    batch_size = Config.BATCH_SIZE if batch_size is None else batch_size

    logger.info(f"Sampling {replicates} trees at x={x} (seed={master_seed}, node_cap={node_cap})")
    executor = BlockExecutor(workers=workers, block_size=block_size)
    func = functools.partial(_sample_block, x, master_seed, node_cap, batch_size)
    results = executor.map(func, replicates)

    rows = np.concatenate([r[0] for r in results], axis=0)
    censored = [i for r in results for i in r[1]]
    if censored:
        logger.error(f"{len(censored)} censored replicate(s) at x={x}")
        raise CensoredSampleError(censored, node_cap)

    return TreeEnsemble(
        x=x,
        master_seed=master_seed,
        node_cap=node_cap,
        sizes=rows[:, 0].copy(),
        heights=rows[:, 1].copy(),
        terminals=rows[:, 2].copy(),
    )


def height_cdf(x: float, replicates: int, master_seed: int, **kwargs) -> HeightCDF:
    """Empirical height CDF; any censored replicate aborts the run"""
    return simulate_trees(x, replicates, master_seed, **kwargs).height_cdf()


def size_sample(x: float, replicates: int, master_seed: int, **kwargs) -> np.ndarray:
    return simulate_trees(x, replicates, master_seed, **kwargs).sizes
