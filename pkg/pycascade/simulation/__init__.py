"""Monte Carlo sampling of continuum cascade trees and discrete cascade graphs"""

from pycascade.simulation.streams import SeedStream
from pycascade.simulation.tree import TreeStats, TreeEnsemble, sample_tree, simulate_trees
from pycascade.simulation.discrete import DiscreteGraphStats, sample_discrete, simulate_discrete

__all__ = [
    "SeedStream",
    "TreeStats",
    "TreeEnsemble",
    "sample_tree",
    "simulate_trees",
    "DiscreteGraphStats",
    "sample_discrete",
    "simulate_discrete",
]
