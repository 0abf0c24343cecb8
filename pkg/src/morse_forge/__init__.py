"""Exact geometry of two-factor free products, with brute-force verification
of quasi-geodesic stability properties on finite balls."""

from .errors import MorseForgeError
from .factors import BoundaryPoint, FactorElement, FactorSpec, FactorSpace
from .graph import Ball, GraphPath
from .morse import CANONICAL_TREE_GAUGE, Gauge, delta_of, nesting_constant, tracking_bound
from .rays import CombNeighborhood, CombRay, TruncatedRay, corresponding_ray, standard_line
from .matching import BoundaryHomeo, MatchState, ProductMatching, run_matching
from .words import FreeProduct, Word

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "BoundaryHomeo",
    "BoundaryPoint",
    "CANONICAL_TREE_GAUGE",
    "CombNeighborhood",
    "CombRay",
    "FactorElement",
    "FactorSpace",
    "FactorSpec",
    "FreeProduct",
    "Gauge",
    "GraphPath",
    "MatchState",
    "MorseForgeError",
    "ProductMatching",
    "TruncatedRay",
    "Word",
    "corresponding_ray",
    "delta_of",
    "nesting_constant",
    "run_matching",
    "standard_line",
    "tracking_bound",
    "__version__",
]
