"""Exotic B-series for scalar Ito diffusions, in exact arithmetic."""

from __future__ import annotations

from .growth import cm_weight, enumerate_trees, realization_coefficient, tree_factorial
from .multiindex import FeynmanMultiIndex, counting_map, parse_multiindex
from .series import SdeProblem, TruncatedSeries, expand
from .trees import ExoticTree, automorphism_count, format_tree, parse_tree


__version__ = "0.1.0"

__all__ = [
    "ExoticTree",
    "FeynmanMultiIndex",
    "SdeProblem",
    "TruncatedSeries",
    "automorphism_count",
    "cm_weight",
    "counting_map",
    "enumerate_trees",
    "expand",
    "format_tree",
    "parse_multiindex",
    "parse_tree",
    "realization_coefficient",
    "tree_factorial",
]
