"""
Block Executor - Split replicates into blocks and merge results in block order
"""

import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, List, Tuple

from pycascade.config import Config
from pycascade.utils.logger import get_logger

logger = get_logger(__name__)

Block = Tuple[int, int]


class BlockExecutor:
    """Runs func(start, stop) over replicate blocks.

    Results come back in block order whatever the worker count, so any merge
    over them is deterministic.
    """

    def __init__(self, workers: int = None, block_size: int = None):
        self.workers = Config.THREADS if workers is None else workers
        self.block_size = Config.BLOCK_SIZE if block_size is None else block_size
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")

    def blocks(self, replicates: int) -> List[Block]:
        return [
            (start, min(start + self.block_size, replicates))
            for start in range(0, replicates, self.block_size)
        ]

    def map(self, func: Callable[[int, int], Any], replicates: int) -> List[Any]:
        """func must be picklable (module-level or a functools.partial of one)"""
        blocks = self.blocks(replicates)
        started = time.perf_counter()

        if self.workers == 1 or len(blocks) == 1:
            results = []
            for i, (start, stop) in enumerate(blocks):
                results.append(func(start, stop))
                logger.debug(f"  block {i + 1}/{len(blocks)} done")
        else:
            starts = [b[0] for b in blocks]
            stops = [b[1] for b in blocks]
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(func, starts, stops))

        logger.debug(
            f"{replicates} replicates in {len(blocks)} blocks on {self.workers} worker(s): "
            f"{time.perf_counter() - started:.2f}s"
        )
        return results
