"""Weisfeiler-Leman refinement, WL kernels and (hierarchical) k-GNNs.

The refinement and aggregation inner loops run in a compiled core when it is
built; ``wlforge.BACKEND`` says which implementation is active.
"""
__version__ = "0.1.0"

from ._backend import NAME as BACKEND
from .errors import (
    ConfigurationError,
    DomainError,
    FormatError,
    TrainingError,
    UnsupportedConfigurationError,
    WLForgeError,
)
from .graph import Graph, enumerate_ksets, is_isomorphic_bruteforce, product_graph
from .higher_order import kwl_run
from .refinement import Coloring, Refiner, RefinementTrace, distinguish, wl1_run

__all__ = [
    "BACKEND",
    "Coloring",
    "ConfigurationError",
    "DomainError",
    "FormatError",
    "Graph",
    "Refiner",
    "RefinementTrace",
    "TrainingError",
    "UnsupportedConfigurationError",
    "WLForgeError",
    "distinguish",
    "enumerate_ksets",
    "is_isomorphic_bruteforce",
    "kwl_run",
    "product_graph",
    "wl1_run",
]
