"""
Discrete Cascade Model - Vertices 0..m, each pair i<j linked with probability c
Its scaling limit m -> inf, c -> 0, cm = x is the continuum model.
"""

import functools
import heapq
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from pycascade.simulation.executor import BlockExecutor
from pycascade.simulation.streams import SeedStream
from pycascade.utils.logger import get_logger
from pycascade.utils.serializer import write_csv

logger = get_logger(__name__)


def top_predator_fraction(x: float) -> float:
    """T = (1 - e^{-x})/x, also the bottom-prey fraction"""
    if x < 0:
        raise ValueError("x must be >= 0")
    return 1.0 if x == 0 else -math.expm1(-x) / x


def neutral_fraction(x: float) -> float:
    """N = e^{-x}"""
    if x < 0:
        raise ValueError("x must be >= 0")
    return math.exp(-x)


@dataclass(frozen=True)
class DiscreteGraphStats:
    m: int
    c: float
    reach_size: int
    longest_from_0: int
    longest_overall: int
    no_out_fraction: float
    no_in_fraction: float
    neutral_fraction: float


def _sample_edges(m: int, c: float, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Bernoulli(c) out-links i -> j, j in (i, m], by geometric skips.

    Skips for all vertices are drawn in rounds of `width` columns; only rows
    whose last target is still <= m continue into the next round. Expected
    work is proportional to the number of links.
    """
    if c == 0.0 or m == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    if c == 1.0:
        src, dst = np.triu_indices(m + 1, k=1)
        return src.astype(np.int64), dst.astype(np.int64)

    width = min(m, max(4, int(math.ceil(c * m + 4.0 * math.sqrt(c * m) + 4))))
    rows = np.arange(m, dtype=np.int64)  # vertex m has no targets
    cursor = rows.copy()
    src_parts: List[np.ndarray] = []
    dst_parts: List[np.ndarray] = []

    while rows.size:
        gaps = rng.geometric(c, size=(rows.size, width))
        targets = cursor[:, None] + np.cumsum(gaps, axis=1)
        keep = targets <= m
        src_parts.append(np.broadcast_to(rows[:, None], targets.shape)[keep])
        dst_parts.append(targets[keep])
        alive = keep[:, -1]
        rows = rows[alive]
        cursor = targets[alive, -1]

    src = np.concatenate(src_parts)
    dst = np.concatenate(dst_parts)
    order = np.lexsort((dst, src))
    return src[order], dst[order]


def _longest_from_origin(m: int, src: np.ndarray, dst: np.ndarray) -> Tuple[int, int]:
    """Forward DP restricted to vertices reachable from 0, in index order"""
    starts = np.searchsorted(src, np.arange(m + 2))
    dist = {0: 0}
    heap = [0]
    while heap:
        i = heapq.heappop(heap)
        d = dist[i] + 1
        for j in dst[starts[i]:starts[i + 1]].tolist():
            if j not in dist:
                dist[j] = d
                heapq.heappush(heap, j)
            elif d > dist[j]:
                dist[j] = d
    return len(dist), max(dist.values())


def _longest_overall(m: int, src: np.ndarray, dst: np.ndarray) -> int:
    """Longest path anywhere, by forward DP over the edges in source order"""
    length = [0] * (m + 1)
    # edges are sorted by source and point forward, so length[i] is final before i is read
    for i, j in zip(src.tolist(), dst.tolist()):
        if length[i] >= length[j]:
            length[j] = length[i] + 1
    return max(length)


def sample_discrete(m: int, c: float, seeds: SeedStream) -> DiscreteGraphStats:
    """One discrete cascade graph and its reachability and fraction statistics"""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"c must be a probability, got {c}")

    rng = seeds.generator()
    src, dst = _sample_edges(m, c, rng)

    has_out = np.zeros(m + 1, dtype=bool)
    has_in = np.zeros(m + 1, dtype=bool)
    has_out[src] = True
    has_in[dst] = True
    reach_size, longest = _longest_from_origin(m, src, dst)

    return DiscreteGraphStats(
        m=m,
        c=c,
        reach_size=reach_size,
        longest_from_0=longest,
        longest_overall=_longest_overall(m, src, dst),
        no_out_fraction=float(np.mean(~has_out)),
        no_in_fraction=float(np.mean(~has_in)),
        neutral_fraction=float(np.mean(~has_out & ~has_in)),
    )


_FIELDS = ("reach_size", "longest_from_0", "longest_overall",
           "no_out_fraction", "no_in_fraction", "neutral_fraction")
DISCRETE_HEADER = ("replicate",) + _FIELDS


def _sample_discrete_block(m: int, c: float, master_seed: int, start: int, stop: int) -> np.ndarray:
    rows = np.zeros((stop - start, len(_FIELDS)), dtype=np.float64)
    for offset, index in enumerate(range(start, stop)):
        stats = sample_discrete(m, c, SeedStream(master_seed, index))
        rows[offset] = [getattr(stats, name) for name in _FIELDS]
    return rows


@dataclass
class DiscreteEnsemble:
    """Statistics of independent discrete cascade graphs, one row per graph"""

    m: int
    c: float
    master_seed: int
    table: np.ndarray

    @property
    def replicates(self) -> int:
        return int(self.table.shape[0])

    @property
    def x(self) -> float:
        return self.c * self.m

    def column(self, name: str) -> np.ndarray:
        return self.table[:, _FIELDS.index(name)]

    def mean(self, name: str) -> Tuple[float, float]:
        """(mean, standard error)"""
        values = self.column(name)
        se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
        return float(values.mean()), se

    def summary(self) -> Dict[str, float]:
        out: Dict[str, float] = {"m": self.m, "c": self.c, "x": self.x,
                                 "replicates": self.replicates}
        for name in _FIELDS:
            out[f"mean_{name}"], out[f"{name}_std_error"] = self.mean(name)
        out["continuum_top_predator_fraction"] = top_predator_fraction(self.x)
        out["continuum_neutral_fraction"] = neutral_fraction(self.x)
        return out

    def to_rows(self):
        return (
            [i, int(r[0]), int(r[1]), int(r[2]), float(r[3]), float(r[4]), float(r[5])]
            for i, r in enumerate(self.table)
        )

    def to_csv(self, path: Union[str, Path]) -> Path:
        return write_csv(path, DISCRETE_HEADER, self.to_rows())


def simulate_discrete(m: int, c: float, replicates: int, master_seed: int,
                      workers: int = None, block_size: int = None) -> DiscreteEnsemble:
    if replicates < 1:
        raise ValueError(f"replicates must be >= 1, got {replicates}")
    logger.info(f"Sampling {replicates} discrete graphs: m={m}, c={c}, seed={master_seed}")
    executor = BlockExecutor(workers=workers, block_size=block_size)
    func = functools.partial(_sample_discrete_block, m, c, master_seed)
    table = np.concatenate(executor.map(func, replicates), axis=0)
    return DiscreteEnsemble(m=m, c=c, master_seed=master_seed, table=table)


def neutral_fraction_check(m: int, c: float, replicates: int, master_seed: int, **kwargs) -> float:
    """Mean fraction of vertices with neither in- nor out-links"""
    return simulate_discrete(m, c, replicates, master_seed, **kwargs).mean("neutral_fraction")[0]
