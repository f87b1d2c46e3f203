"""Pattern generators, random-labeling inference and size/power simulation."""

from .harness import SimulationReport, empirical_power, empirical_size, simulate
from .patterns import FAMILIES, PatternSpec, generate, random_label
from .randomization import RelabelEngine, randomization_pvalue, randomization_pvalues
from .rng import default_seed, stream

__all__ = [
    "SimulationReport",
    "empirical_power",
    "empirical_size",
    "simulate",
    "FAMILIES",
    "PatternSpec",
    "generate",
    "random_label",
    "RelabelEngine",
    "randomization_pvalue",
    "randomization_pvalues",
    "default_seed",
    "stream",
]
