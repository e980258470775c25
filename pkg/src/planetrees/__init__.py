"""Uniform random plane trees with a prescribed degree sequence."""

__version__ = "0.1.0"

from .degseq import DegreeSequence, DegreeSequenceError, count_forests, parse, stats, validate
from .sampler import MarkedTree, OffspringDistribution, sample_gw_conditioned, sample_marked, sample_uniform
from .tree_core import PlaneTree, contour, height, lukasiewicz, mirror

__all__ = [
    "DegreeSequence",
    "DegreeSequenceError",
    "MarkedTree",
    "OffspringDistribution",
    "PlaneTree",
    "contour",
    "count_forests",
    "height",
    "lukasiewicz",
    "mirror",
    "parse",
    "sample_gw_conditioned",
    "sample_marked",
    "sample_uniform",
    "stats",
    "validate",
]
