"""
Unit tests for Monte Carlo trees and discrete cascade graphs
"""

import math
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np

from pycascade.core.errors import CensoredSampleError, NodeBudgetExceeded
from pycascade.core.recurrence import mean_height, n_max_for_heights, run
from pycascade.simulation.discrete import (
    _longest_from_origin, _longest_overall, _sample_edges, neutral_fraction,
    neutral_fraction_check, sample_discrete, simulate_discrete, top_predator_fraction,
)
from pycascade.simulation.executor import BlockExecutor
from pycascade.simulation.streams import SeedStream
from pycascade.simulation.tree import TreeStats, sample_tree, simulate_trees


def _brute_force_paths(m, src, dst):
    """Longest paths by plain dynamic programming over vertices in order"""
    from_zero = [None] * (m + 1)
    from_zero[0] = 0
    anywhere = [0] * (m + 1)
    for i, j in sorted(zip(src.tolist(), dst.tolist())):
        anywhere[j] = max(anywhere[j], anywhere[i] + 1)
        if from_zero[i] is not None:
            from_zero[j] = max(from_zero[j] or 0, from_zero[i] + 1)
    reached = [d for d in from_zero if d is not None]
    return len(reached), max(reached), max(anywhere)


class TestSeedStream(unittest.TestCase):
    """Test per-replicate substreams"""

    def test_same_key_same_draws(self):
        """A (seed, index) pair always yields the same numbers"""
        a = SeedStream(7, 3).generator().random(5)
        b = SeedStream(7, 3).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_different_index_different_draws(self):
        """Substreams are distinct"""
        a = SeedStream(7, 3).generator().random(5)
        b = SeedStream(7, 4).generator().random(5)
        self.assertFalse(np.array_equal(a, b))

    def test_invalid_seed(self):
        """Seeds must fit in 64 bits"""
        with self.assertRaises(ValueError):
            SeedStream(-1)
        with self.assertRaises(ValueError):
            SeedStream(2 ** 64)


class TestBlockExecutor(unittest.TestCase):
    """Test replicate blocking"""

    def test_blocks_cover_replicates(self):
        """Blocks are contiguous and the last one is short"""
        executor = BlockExecutor(workers=1, block_size=100)
        self.assertEqual(executor.blocks(250), [(0, 100), (100, 200), (200, 250)])

    def test_invalid_workers(self):
        """At least one worker is needed"""
        with self.assertRaises(ValueError):
            BlockExecutor(workers=0)


class TestTreeSampler(unittest.TestCase):
    """Test single-tree sampling"""

    def test_empty_interval(self):
        """x = 0 gives the single root"""
        stats = sample_tree(0.0, SeedStream(1))
        self.assertEqual(stats, TreeStats(size=1, height=0, terminal_count=1))

    def test_stats_consistent(self):
        """Sizes, heights and terminal counts obey their bounds"""
        for i in range(50):
            stats = sample_tree(3.0, SeedStream(11, i))
            self.assertGreaterEqual(stats.size, 1)
            self.assertLessEqual(stats.height, stats.size - 1)
            self.assertLessEqual(stats.terminal_count, stats.size)

    def test_stats_invariants_over_random_intervals(self):
        """Bounds hold for trees on random interval lengths in [0, 6]"""
        lengths = np.random.default_rng(5).uniform(0.0, 6.0, size=100)
        for i, x in enumerate(lengths.tolist()):
            stats = sample_tree(x, SeedStream(21, i))
            self.assertGreaterEqual(stats.size, 1, f"x={x}")
            self.assertLessEqual(stats.height, stats.size - 1, f"x={x}")
            self.assertGreaterEqual(stats.terminal_count, 1, f"x={x}")
            self.assertLessEqual(stats.terminal_count, stats.size, f"x={x}")
            self.assertEqual(stats.height == 0, stats.size == 1, f"x={x}")

    def test_invalid_stats(self):
        """A multi-vertex tree of height 0 is rejected"""
        with self.assertRaises(ValueError):
            TreeStats(size=3, height=0, terminal_count=2)

    def test_node_cap(self):
        """A tree larger than the cap raises NodeBudgetExceeded"""
        with self.assertRaises(NodeBudgetExceeded) as ctx:
            sample_tree(20.0, SeedStream(5, 9), node_cap=1)
        self.assertEqual(ctx.exception.replicate, 9)


class TestTreeEnsemble(unittest.TestCase):
    """Test tree ensembles"""

    @classmethod
    def setUpClass(cls):
        cls.ensemble = simulate_trees(2.0, 4000, 2024, block_size=500)

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.test_dir)

    def test_mean_size(self):
        """Mean size is e^x within five standard errors"""
        summary = self.ensemble.summary()
        self.assertLess(abs(summary["mean_size"] - math.exp(2.0)),
                        5 * summary["mean_size_std_error"])

    def test_single_vertex_fraction(self):
        """The root has no children with probability e^-x"""
        p = math.exp(-2.0)
        se = math.sqrt(p * (1 - p) / self.ensemble.replicates)
        self.assertLess(abs(self.ensemble.summary()["single_vertex_fraction"] - p), 5 * se)

    def test_height_cdf_matches_recurrence(self):
        """Empirical P(H <= n) agrees with P_n(x)"""
        result = run(25, store=range(26), h=1e-3)
        cdf = self.ensemble.height_cdf().as_dict()
        for n in range(26):
            expected = result.profile(n)(2.0)
            if not 0.001 < expected < 0.999:
                continue
            empirical, se = cdf.get(n, (1.0, 0.0))
            self.assertLess(abs(empirical - expected), 5 * max(se, 1e-3) + 1e-4, f"n={n}")

    def test_height_moments(self):
        """Height moments are consistent with the sample"""
        moments = self.ensemble.height_moments()
        self.assertAlmostEqual(moments["mean"], float(np.mean(self.ensemble.heights)))
        self.assertGreater(moments["variance"], 0.0)

    def test_deterministic_across_workers(self):
        """Worker count does not change any replicate"""
        serial = simulate_trees(1.5, 300, 99, workers=1, block_size=50)
        parallel = simulate_trees(1.5, 300, 99, workers=2, block_size=50)
        np.testing.assert_array_equal(serial.sizes, parallel.sizes)
        np.testing.assert_array_equal(serial.heights, parallel.heights)
        a = serial.to_csv(Path(self.test_dir) / "a.csv").read_bytes()
        b = parallel.to_csv(Path(self.test_dir) / "b.csv").read_bytes()
        self.assertEqual(a, b)

    def test_censored_replicates_abort(self):
        """Any censored replicate aborts the run and is named"""
        with self.assertRaises(CensoredSampleError) as ctx:
            simulate_trees(20.0, 3, 1, node_cap=5)
        self.assertEqual(ctx.exception.replicates, [0, 1, 2])
        self.assertIn("node_cap=5", str(ctx.exception))


class TestDiscreteFormulas(unittest.TestCase):
    """Test continuum fractions"""

    def test_top_predator_fraction(self):
        """(1 - e^-3)/3 = 0.316738"""
        self.assertAlmostEqual(top_predator_fraction(3.0), 0.316738, places=6)
        self.assertEqual(top_predator_fraction(0.0), 1.0)

    def test_neutral_fraction(self):
        """e^-3 = 0.049787"""
        self.assertAlmostEqual(neutral_fraction(3.0), 0.049787, places=6)


class TestDiscreteGraphs(unittest.TestCase):
    """Test discrete cascade graphs"""

    def test_complete_graph(self):
        """c = 1 links every ordered pair"""
        stats = sample_discrete(10, 1.0, SeedStream(1))
        self.assertEqual(stats.reach_size, 11)
        self.assertEqual(stats.longest_from_0, 10)
        self.assertEqual(stats.longest_overall, 10)
        self.assertAlmostEqual(stats.no_out_fraction, 1 / 11)
        self.assertEqual(stats.neutral_fraction, 0.0)

    def test_empty_graph(self):
        """c = 0 leaves every vertex isolated"""
        stats = sample_discrete(10, 0.0, SeedStream(1))
        self.assertEqual(stats.reach_size, 1)
        self.assertEqual(stats.longest_from_0, 0)
        self.assertEqual(stats.neutral_fraction, 1.0)

    def test_invalid_parameters(self):
        """m >= 1 and c in [0, 1]"""
        with self.assertRaises(ValueError):
            sample_discrete(0, 0.5, SeedStream(1))
        with self.assertRaises(ValueError):
            sample_discrete(10, 1.5, SeedStream(1))

    def test_edges_well_formed(self):
        """Edges point forward, stay in range, and are unique"""
        rng = SeedStream(4).generator()
        m, c = 2000, 0.002
        src, dst = _sample_edges(m, c, rng)
        self.assertTrue(np.all(src < dst))
        self.assertTrue(np.all(dst <= m))
        self.assertEqual(len(set(zip(src.tolist(), dst.tolist()))), src.size)
        expected = c * m * (m + 1) / 2
        self.assertLess(abs(src.size - expected), 6 * math.sqrt(expected))

    def test_longest_paths_match_brute_force(self):
        """Vectorized path lengths agree with a direct DP"""
        m = 60
        for i in range(5):
            src, dst = _sample_edges(m, 0.08, SeedStream(8, i).generator())
            reach, longest, overall = _brute_force_paths(m, src, dst)
            self.assertEqual(_longest_from_origin(m, src, dst), (reach, longest))
            self.assertEqual(_longest_overall(m, src, dst), overall)

    def test_longest_overall_dense_graph(self):
        """On the complete graph the longest path visits every vertex"""
        m = 300
        src, dst = _sample_edges(m, 1.0, SeedStream(1).generator())
        self.assertEqual(_longest_overall(m, src, dst), m)
        self.assertEqual(_longest_overall(m, src[:0], dst[:0]), 0)

    def test_no_out_fraction_near_continuum(self):
        """Mean no-out fraction approaches (1 - e^-x)/x"""
        ensemble = simulate_discrete(2000, 1.5 / 2000, 200, 17)
        mean, _ = ensemble.mean("no_out_fraction")
        self.assertLess(abs(mean - top_predator_fraction(1.5)) / top_predator_fraction(1.5), 0.03)

    def test_neutral_fraction_check(self):
        """Mean neutral fraction is 1 at c = 0 and near e^-1 at cm = 1"""
        self.assertEqual(neutral_fraction_check(50, 0.0, 5, 1), 1.0)
        mean = neutral_fraction_check(500, 1 / 500, 100, 23)
        self.assertLess(abs(mean - neutral_fraction(1.0)) / neutral_fraction(1.0), 0.05)

    def test_deterministic_across_workers(self):
        """Discrete ensembles do not depend on the worker count"""
        serial = simulate_discrete(300, 0.01, 40, 5, workers=1, block_size=10)
        parallel = simulate_discrete(300, 0.01, 40, 5, workers=3, block_size=10)
        np.testing.assert_array_equal(serial.table, parallel.table)


class TestContinuumLimits(unittest.TestCase):
    """Test Monte Carlo against the recurrence and the continuum limit"""

    @classmethod
    def setUpClass(cls):
        cls.heights = run(n_max_for_heights(2.0), h=1e-2)

    def test_mean_height_matches_sampled_trees(self):
        """E[H(1)] from the recurrence lies within five standard errors of sampled heights"""
        expected = mean_height(1.0, self.heights)
        moments = simulate_trees(1.0, 20000, 31, workers=2).height_moments()
        self.assertLess(abs(moments["mean"] - expected), 5 * moments["std_error"])

    def test_discrete_graphs_approach_continuum(self):
        """Reach and longest path from 0 move toward e^x and E[H(x)] as m grows at fixed cm"""
        x = 2.0
        continuum = {"reach_size": math.exp(x), "longest_from_0": mean_height(x, self.heights)}
        deviation = {}
        for m in (25, 500):
            ensemble = simulate_discrete(m, x / m, 10000, 41, workers=2)
            deviation[m] = {name: abs(ensemble.mean(name)[0] - value)
                            for name, value in continuum.items()}
        for name in continuum:
            self.assertLess(deviation[500][name], deviation[25][name], name)


if __name__ == '__main__':
    unittest.main()
